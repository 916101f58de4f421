#pragma once

#include <stdexcept>
#include <string>

namespace multiroc {

// Bad input: malformed files, invalid labels, inconsistent dimensions.
// The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The numerics failed on otherwise valid input. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MULTIROC_DEFINE_ERROR(Name, Base)            \
    class Name : public Base {                       \
    public:                                          \
        using Base::Base;                            \
    }

MULTIROC_DEFINE_ERROR(ParseError, InputError);
MULTIROC_DEFINE_ERROR(SimplexViolation, InputError);
MULTIROC_DEFINE_ERROR(LabelOutOfRange, InputError);
MULTIROC_DEFINE_ERROR(EmptyClass, InputError);
MULTIROC_DEFINE_ERROR(InvalidK, InputError);
MULTIROC_DEFINE_ERROR(EmptyScores, InputError);
MULTIROC_DEFINE_ERROR(NonPositiveWeight, InputError);
MULTIROC_DEFINE_ERROR(DimensionMismatch, InputError);
MULTIROC_DEFINE_ERROR(MismatchedB, InputError);
MULTIROC_DEFINE_ERROR(UnknownExperiment, InputError);
MULTIROC_DEFINE_ERROR(EmptyClassAfterSampling, InputError);

MULTIROC_DEFINE_ERROR(NoConvergence, NumericalError);
MULTIROC_DEFINE_ERROR(NumericalDegeneracy, NumericalError);
MULTIROC_DEFINE_ERROR(InsufficientReplicates, NumericalError);

#undef MULTIROC_DEFINE_ERROR

}  // namespace multiroc
