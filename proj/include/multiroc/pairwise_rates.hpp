#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "multiroc/dataset.hpp"
#include "multiroc/matrix.hpp"

namespace multiroc {

// One ordered one-vs-one problem: `pos` is the classification class (whose
// score column is thresholded), `neg` the reference class.
struct PairIndex {
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::size_t flat = 0;

    std::string label() const;  // "pos>neg"
    bool operator==(const PairIndex&) const = default;
};

// All k(k-1) ordered pairs: (0,1),(0,2),…,(0,k-1),(1,0),(1,2),… Throws InvalidK for k < 2.
std::vector<PairIndex> enumerate_pairs(std::size_t k);
std::size_t pair_count(std::size_t k);

// T evenly spaced quantile levels from 1 down to 0 inclusive (T >= 2).
std::vector<double> default_levels(std::size_t T = 50);

// Empirical quantiles (linear interpolation between order statistics) at each
// level, returned in the order of `levels`. Throws EmptyScores.
std::vector<double> threshold_grid(std::span<const double> scores, std::span<const double> levels);

// Stacked pairwise TPR/FPR matrices. Row t corresponds to quantile level
// levels[t] (decreasing), column l to pairs[l].
struct PairwiseRates {
    Matrix mtp;         // T×K true-positive rates
    Matrix mfp;         // T×K false-positive rates
    Matrix thresholds;  // T×K score thresholds
    std::vector<std::size_t> n_pos;
    std::vector<std::size_t> n_neg;
    std::vector<double> quantile_levels;
    std::vector<PairIndex> pairs;
    // Columns whose pair-restricted scores were constant. Their thresholds
    // fall back to the levels themselves, turning the column into a step
    // function at the constant score.
    std::vector<std::size_t> degenerate_columns;

    std::size_t T() const noexcept { return mtp.rows(); }
    std::size_t K() const noexcept { return mtp.cols(); }

    // Same cardinalities and thresholds with replaced rate matrices.
    PairwiseRates with_rates(Matrix tp, Matrix fp) const;
    // Keeps only the listed columns (e.g. a single pair for binary analysis).
    PairwiseRates select_columns(const std::vector<std::size_t>& columns) const;
    bool operator==(const PairwiseRates&) const = default;
};

// Builds the rate matrices. For pair (i,j) the thresholds are quantiles of
// the class-i score over observations labelled i or j; an observation counts
// as positive when its score is strictly greater than the threshold.
// Columns are computed in parallel; the result does not depend on the
// thread count.
PairwiseRates rate_matrices(const ScoredDataset& dataset, std::span<const double> levels);
PairwiseRates rate_matrices(const ScoredDataset& dataset, std::size_t T = 50);

void write_rates_csv(std::ostream& out, const Matrix& rates, const std::vector<PairIndex>& pairs);
void write_rates_json(std::ostream& out, const PairwiseRates& rates);
PairwiseRates read_rates_json(std::istream& in);

}  // namespace multiroc
