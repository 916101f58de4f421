#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multiroc/factorizer.hpp"
#include "multiroc/pairwise_rates.hpp"
#include "multiroc/roc_summary.hpp"

namespace multiroc {

// Pointwise quantile envelope of resampled curves on a fixed x grid.
struct Band {
    std::vector<double> x;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct BootstrapResult {
    std::vector<double> d_samples;  // one per retained replicate, in replicate order
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double gamma = 0.95;
    std::vector<RocCurve> curves;  // filled only when requested
    std::uint64_t seed = 0;
    std::size_t B = 0;             // replicates requested
    std::size_t dropped = 0;       // replicates whose refit failed

    double width() const { return ci_upper - ci_lower; }
};

struct BootstrapOptions {
    std::size_t B = 100;
    double gamma = 0.95;
    std::uint64_t seed = 0;
    bool keep_curves = false;
    FitOptions fit;
};

// Parametric bootstrap: every replicate redraws each cell's count from
// Binomial(trials, logistic(eta)), refits with the same costs and recomputes
// D. Replicate b draws from its own stream derived from (seed, b), so the
// samples do not depend on how replicates are scheduled across threads.
// Throws InsufficientReplicates when more than 20% of refits fail.
BootstrapResult bootstrap(const PairwiseRates& rates, const FactorizationFit& fit, const CostWeights& costs,
                          const BootstrapOptions& opts = {});

// One replicate; nullopt when its refit failed. Shared by the parallel
// driver and the serial reference.
struct ReplicateOutcome {
    double d = 0.0;
    RocCurve curve;
};
std::optional<ReplicateOutcome> bootstrap_replicate(const PairwiseRates& rates, const Matrix& eta,
                                                    const CostWeights& costs, const FitOptions& fit_opts,
                                                    std::uint64_t seed, std::size_t replicate);

// Collects per-replicate outcomes into a result (CI, drop accounting).
BootstrapResult summarize_replicates(std::vector<std::optional<ReplicateOutcome>> outcomes,
                                     const BootstrapOptions& opts);

// Linear-interpolation quantile of unsorted samples.
double quantile(std::span<const double> samples, double level);
// Percentile interval at level gamma.
std::pair<double, double> percentile_interval(std::span<const double> samples, double gamma);

Band curve_band(const std::vector<RocCurve>& curves, double gamma = 0.95, std::size_t grid = 101);

struct RankingTable {
    std::vector<std::string> models;
    // Model indices from best to worst → fraction of replicates with that order.
    std::map<std::vector<std::size_t>, double> rows;

    std::string label(const std::vector<std::size_t>& order) const;  // "a>b>c"
};

// Ranks the models within each replicate by D (ties go to the earlier model)
// and tabulates how often each ordering occurs. Throws MismatchedB.
RankingTable ranking_probabilities(const std::vector<std::vector<double>>& d_samples,
                                   const std::vector<std::string>& models);
RankingTable ranking_probabilities(const std::vector<BootstrapResult>& results,
                                   const std::vector<std::string>& models);

void write_bootstrap_json(std::ostream& out, const BootstrapResult& r, double point_estimate);
void write_band_csv(std::ostream& out, const Band& band);
void write_band_json(std::ostream& out, const Band& band);
// One row per table, one column per ordering of the models; "-" marks zero.
void write_ranking_csv(std::ostream& out, const RankingTable& table, const std::string& row_name);
void write_ranking_json(std::ostream& out, const RankingTable& table);

}  // namespace multiroc
