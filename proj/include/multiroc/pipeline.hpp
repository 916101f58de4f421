#pragma once

#include <optional>
#include <vector>

#include "multiroc/dataset.hpp"
#include "multiroc/factorizer.hpp"
#include "multiroc/pairwise_rates.hpp"
#include "multiroc/roc_summary.hpp"

namespace multiroc {

struct EvaluateOptions {
    std::size_t thresholds = 50;
    WeightMode mode = WeightMode::unweighted;
    // Used when mode == custom.
    std::optional<CostWeights> custom;
    // Multiplied into the cardinality weights of `mode` (e.g. a cost schedule
    // on top of the unweighted base).
    std::optional<CostWeights> extra;
    FitOptions fit;
};

struct Evaluation {
    PairwiseRates rates;
    CostWeights costs;
    FactorizationFit fit;
    CenteredComponents centered;
    RocCurve curve;
    double d = 0.0;
};

// rates → weights → factorization → centering → curve → D.
Evaluation evaluate(const ScoredDataset& dataset, const EvaluateOptions& opts = {});

}  // namespace multiroc
