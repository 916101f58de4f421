#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "multiroc/matrix.hpp"

namespace multiroc {

inline constexpr double kSimplexTolerance = 1e-6;

enum class DataFormat { csv, json };

DataFormat parse_format(std::string_view name);
// Guesses from the file extension (".json" → json, anything else → csv).
DataFormat format_from_path(const std::filesystem::path& path);

// Per-class observation counts; sums to the number of observations.
struct ClassCounts {
    std::vector<std::size_t> counts;

    std::size_t total() const;
    std::size_t operator[](std::size_t c) const { return counts[c]; }
    bool operator==(const ClassCounts&) const = default;
};

// An n×k matrix of predicted class probabilities plus the true labels.
// Validated on construction and immutable afterwards.
class ScoredDataset {
public:
    // Validates and (within the simplex tolerance) renormalizes each row.
    // Throws SimplexViolation, LabelOutOfRange or EmptyClass.
    ScoredDataset(Matrix probs, std::vector<int> labels, double simplex_tol = kSimplexTolerance);

    std::size_t n() const noexcept { return probs_.rows(); }
    std::size_t k() const noexcept { return probs_.cols(); }
    const Matrix& probs() const noexcept { return probs_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    double prob(std::size_t obs, std::size_t cls) const noexcept { return probs_(obs, cls); }
    int label(std::size_t obs) const noexcept { return labels_[obs]; }

    bool operator==(const ScoredDataset&) const = default;

private:
    Matrix probs_;
    std::vector<int> labels_;
};

ClassCounts class_counts(const ScoredDataset& dataset);

// Readers. CSV: one header row, then k probability columns and a trailing
// integer label column. JSON: {"probs": [[...], ...], "labels": [...]}.
ScoredDataset load_dataset(std::istream& in, DataFormat format,
                           double simplex_tol = kSimplexTolerance);
ScoredDataset load_dataset(const std::filesystem::path& path, DataFormat format,
                           double simplex_tol = kSimplexTolerance);
ScoredDataset load_dataset(const std::filesystem::path& path);

// Probability-only CSV (header + k columns, no label column) with labels
// supplied separately, one integer per line.
Matrix load_probabilities_csv(std::istream& in);
std::vector<int> load_labels(std::istream& in);
ScoredDataset load_dataset_split(const std::filesystem::path& probs_path,
                                 const std::filesystem::path& labels_path,
                                 double simplex_tol = kSimplexTolerance);

void write_dataset(std::ostream& out, const ScoredDataset& dataset, DataFormat format);
void write_dataset(const std::filesystem::path& path, const ScoredDataset& dataset,
                   DataFormat format);

// Keeps the listed observations (in the given order).
ScoredDataset subset(const ScoredDataset& dataset, const std::vector<std::size_t>& rows);

// Shortest decimal representation that parses back to the same double
// (always at least 15 significant digits of precision).
std::string format_real(double value);

}  // namespace multiroc
