#include "multiroc/serial_reference.hpp"

#include <algorithm>

#include "multiroc/errors.hpp"

namespace multiroc::serial {

PairwiseRates rate_matrices(const ScoredDataset& dataset, std::span<const double> levels) {
    const std::size_t k = dataset.k();
    const std::size_t T = levels.size();
    const auto pairs = enumerate_pairs(k);
    const std::size_t K = pairs.size();

    PairwiseRates out;
    out.mtp = Matrix(T, K);
    out.mfp = Matrix(T, K);
    out.thresholds = Matrix(T, K);
    out.n_pos.assign(K, 0);
    out.n_neg.assign(K, 0);
    out.quantile_levels.assign(levels.begin(), levels.end());
    out.pairs = pairs;

    for (const auto& pair : pairs) {
        std::vector<double> pooled;
        for (std::size_t r = 0; r < dataset.n(); ++r) {
            const auto y = static_cast<std::size_t>(dataset.label(r));
            if (y == pair.pos) ++out.n_pos[pair.flat];
            if (y == pair.neg) ++out.n_neg[pair.flat];
            if (y == pair.pos || y == pair.neg) pooled.push_back(dataset.prob(r, pair.pos));
        }
        if (out.n_pos[pair.flat] == 0 || out.n_neg[pair.flat] == 0) {
            throw EmptyClass("pair " + pair.label() + " has an empty class");
        }
        const bool constant = std::all_of(pooled.begin(), pooled.end(), [&](double s) { return s == pooled[0]; });
        const auto thresholds = constant ? std::vector<double>(levels.begin(), levels.end())
                                         : threshold_grid(pooled, levels);
        if (constant) out.degenerate_columns.push_back(pair.flat);

        for (std::size_t t = 0; t < T; ++t) {
            std::size_t tp = 0, fp = 0;
            for (std::size_t r = 0; r < dataset.n(); ++r) {
                const auto y = static_cast<std::size_t>(dataset.label(r));
                const bool above = dataset.prob(r, pair.pos) > thresholds[t];
                if (y == pair.pos && above) ++tp;
                if (y == pair.neg && above) ++fp;
            }
            out.thresholds(t, pair.flat) = thresholds[t];
            out.mtp(t, pair.flat) = static_cast<double>(tp) / static_cast<double>(out.n_pos[pair.flat]);
            out.mfp(t, pair.flat) = static_cast<double>(fp) / static_cast<double>(out.n_neg[pair.flat]);
        }
    }
    return out;
}

BootstrapResult bootstrap(const PairwiseRates& rates, const FactorizationFit& fitted, const CostWeights& costs,
                          const BootstrapOptions& opts) {
    if (opts.B < 2) throw InputError("bootstrap needs at least 2 replicates");
    require_converged(fitted);
    std::vector<std::optional<ReplicateOutcome>> outcomes;
    outcomes.reserve(opts.B);
    for (std::size_t b = 0; b < opts.B; ++b) {
        outcomes.push_back(bootstrap_replicate(rates, fitted.eta, costs, opts.fit, opts.seed, b));
    }
    return summarize_replicates(std::move(outcomes), opts);
}

std::vector<PairAuc> all_pair_aucs(const ScoredDataset& dataset) {
    std::vector<PairAuc> out;
    for (const auto& pair : enumerate_pairs(dataset.k())) out.push_back(mann_whitney_auc(dataset, pair));
    return out;
}

}  // namespace multiroc::serial
