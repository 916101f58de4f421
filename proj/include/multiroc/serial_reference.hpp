#pragma once

// Straightforward single-threaded versions of the parallel kernels. They are
// kept for testing (the parallel kernels must reproduce them bit for bit) and
// as the baseline in the benchmark.

#include "multiroc/baselines.hpp"
#include "multiroc/dataset.hpp"
#include "multiroc/pairwise_rates.hpp"
#include "multiroc/uncertainty.hpp"

namespace multiroc::serial {

// Direct counting: O(n) per threshold and pair, no sorting or searching.
PairwiseRates rate_matrices(const ScoredDataset& dataset, std::span<const double> levels);

// Replicates one after another on the calling thread.
BootstrapResult bootstrap(const PairwiseRates& rates, const FactorizationFit& fit, const CostWeights& costs,
                          const BootstrapOptions& opts = {});

std::vector<PairAuc> all_pair_aucs(const ScoredDataset& dataset);

}  // namespace multiroc::serial
