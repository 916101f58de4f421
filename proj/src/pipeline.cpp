#include "multiroc/pipeline.hpp"

namespace multiroc {

Evaluation evaluate(const ScoredDataset& dataset, const EvaluateOptions& opts) {
    Evaluation ev;
    ev.rates = rate_matrices(dataset, opts.thresholds);
    ev.costs = cardinality_weights(ev.rates, opts.mode, opts.custom);
    if (opts.extra) {
        opts.extra->validate(ev.rates.T(), ev.rates.K());
        ev.costs = ev.costs * *opts.extra;
    }
    ev.fit = fit(ev.rates, ev.costs, opts.fit);
    ev.centered = center(ev.fit);
    ev.curve = curve(ev.centered, ev.rates.quantile_levels);
    ev.d = d_statistic(ev.curve).value;
    return ev;
}

}  // namespace multiroc
