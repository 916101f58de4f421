#pragma once

#include <vector>

#include "multiroc/dataset.hpp"
#include "multiroc/pairwise_rates.hpp"

namespace multiroc {

struct PairAuc {
    PairIndex pair;
    double value = 0.0;
};

// Rank-sum (Mann-Whitney U) estimate of P(score of a pos-class observation >
// score of a neg-class observation) on the pos-class score column; ties
// count one half. Throws EmptyClass.
PairAuc mann_whitney_auc(const ScoredDataset& dataset, const PairIndex& pair);

// Same statistic on two explicit score samples.
double mann_whitney_auc(std::vector<double> positive, std::vector<double> negative);

// Average of A(i,j) over all k(k-1) ordered pairs. With `symmetrized`, each
// unordered pair contributes (A(i,j) + A(j,i)) / 2 once, which is the same
// average written the other way round.
double hand_till_m(const ScoredDataset& dataset, bool symmetrized = false);

std::vector<PairAuc> all_pair_aucs(const ScoredDataset& dataset);

}  // namespace multiroc
