#include "multiroc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "multiroc/errors.hpp"
#include "multiroc/parallel.hpp"
#include "multiroc/rng.hpp"

namespace multiroc {

namespace {

constexpr double kMaxDropFraction = 0.2;

std::int64_t draw_binomial(Rng& rng, std::size_t trials, double p) {
    if (trials == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return static_cast<std::int64_t>(trials);
    std::binomial_distribution<std::int64_t> dist(static_cast<std::int64_t>(trials), p);
    return dist(rng);
}

}  // namespace

std::optional<ReplicateOutcome> bootstrap_replicate(const PairwiseRates& rates, const Matrix& eta,
                                                    const CostWeights& costs, const FitOptions& fit_opts,
                                                    std::uint64_t seed, std::size_t replicate) {
    const std::size_t T = rates.T();
    const std::size_t K = rates.K();
    if (eta.rows() != 2 * T || eta.cols() != K) {
        throw DimensionMismatch("fitted predictor does not match the rate matrices");
    }
    Rng rng = make_rng(seed, replicate);
    Matrix tp(T, K), fp(T, K);
    // Fixed draw order: TPR block row-major, then FPR block.
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t l = 0; l < K; ++l) {
            const auto n = rates.n_pos[l];
            tp(t, l) = static_cast<double>(draw_binomial(rng, n, logistic(eta(t, l)))) / static_cast<double>(n);
        }
    }
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t l = 0; l < K; ++l) {
            const auto n = rates.n_neg[l];
            fp(t, l) = static_cast<double>(draw_binomial(rng, n, logistic(eta(T + t, l)))) / static_cast<double>(n);
        }
    }
    try {
        const auto refit = fit(rates.with_rates(std::move(tp), std::move(fp)), costs, fit_opts);
        if (!refit.converged) return std::nullopt;
        ReplicateOutcome out;
        out.curve = curve(center(refit), rates.quantile_levels);
        out.d = d_statistic(out.curve).value;
        return out;
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

BootstrapResult summarize_replicates(std::vector<std::optional<ReplicateOutcome>> outcomes,
                                     const BootstrapOptions& opts) {
    BootstrapResult r;
    r.B = opts.B;
    r.seed = opts.seed;
    r.gamma = opts.gamma;
    for (auto& o : outcomes) {
        if (!o) {
            ++r.dropped;
            continue;
        }
        r.d_samples.push_back(o->d);
        if (opts.keep_curves) r.curves.push_back(std::move(o->curve));
    }
    if (static_cast<double>(r.dropped) > kMaxDropFraction * static_cast<double>(r.B) || r.d_samples.size() < 2) {
        throw InsufficientReplicates(std::to_string(r.dropped) + " of " + std::to_string(r.B) +
                                     " bootstrap refits failed");
    }
    std::tie(r.ci_lower, r.ci_upper) = percentile_interval(r.d_samples, r.gamma);
    return r;
}

BootstrapResult bootstrap(const PairwiseRates& rates, const FactorizationFit& fitted, const CostWeights& costs,
                          const BootstrapOptions& opts) {
    if (opts.B < 2) throw InputError("bootstrap needs at least 2 replicates");
    if (!(opts.gamma > 0.0 && opts.gamma < 1.0)) throw InputError("confidence level must lie in (0, 1)");
    require_converged(fitted);
    costs.validate(rates.T(), rates.K());

    std::vector<std::optional<ReplicateOutcome>> outcomes(opts.B);
    LoopErrors errors(opts.B);
    const auto B = static_cast<std::ptrdiff_t>(opts.B);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < B; ++b) {
        const auto i = static_cast<std::size_t>(b);
        errors.run(i, [&] { outcomes[i] = bootstrap_replicate(rates, fitted.eta, costs, opts.fit, opts.seed, i); });
    }
    errors.rethrow();
    return summarize_replicates(std::move(outcomes), opts);
}

double quantile(std::span<const double> samples, double level) {
    if (samples.empty()) throw EmptyScores("quantile of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * std::clamp(level, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::pair<double, double> percentile_interval(std::span<const double> samples, double gamma) {
    const double tail = (1.0 - gamma) / 2.0;
    return {quantile(samples, tail), quantile(samples, 1.0 - tail)};
}

Band curve_band(const std::vector<RocCurve>& curves, double gamma, std::size_t grid) {
    Band band;
    if (curves.empty() || grid < 2) return band;
    const double tail = (1.0 - gamma) / 2.0;
    std::vector<double> ys(curves.size());
    for (std::size_t g = 0; g < grid; ++g) {
        const double x = static_cast<double>(g) / static_cast<double>(grid - 1);
        for (std::size_t b = 0; b < curves.size(); ++b) ys[b] = interpolate(curves[b], x);
        band.x.push_back(x);
        band.lower.push_back(quantile(ys, tail));
        band.upper.push_back(quantile(ys, 1.0 - tail));
    }
    return band;
}

std::string RankingTable::label(const std::vector<std::size_t>& order) const {
    std::string s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) s += '>';
        s += models.at(order[i]);
    }
    return s;
}

RankingTable ranking_probabilities(const std::vector<std::vector<double>>& d_samples,
                                   const std::vector<std::string>& models) {
    if (d_samples.empty()) throw InputError("ranking needs at least one model");
    if (models.size() != d_samples.size()) throw DimensionMismatch("one model name per sample set required");
    const std::size_t B = d_samples.front().size();
    for (std::size_t m = 0; m < d_samples.size(); ++m) {
        if (d_samples[m].size() != B) {
            throw MismatchedB("model '" + models[m] + "' has " + std::to_string(d_samples[m].size()) +
                              " replicates, expected " + std::to_string(B));
        }
    }
    if (B == 0) throw MismatchedB("no replicates to rank");

    RankingTable table;
    table.models = models;
    std::map<std::vector<std::size_t>, std::size_t> counts;
    std::vector<std::size_t> order(models.size());
    for (std::size_t b = 0; b < B; ++b) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t c) { return d_samples[a][b] > d_samples[c][b]; });
        ++counts[order];
    }
    for (const auto& [perm, count] : counts) {
        table.rows[perm] = static_cast<double>(count) / static_cast<double>(B);
    }
    return table;
}

RankingTable ranking_probabilities(const std::vector<BootstrapResult>& results,
                                   const std::vector<std::string>& models) {
    std::vector<std::vector<double>> samples;
    for (const auto& r : results) samples.push_back(r.d_samples);
    return ranking_probabilities(samples, models);
}

void write_bootstrap_json(std::ostream& out, const BootstrapResult& r, double point_estimate) {
    nlohmann::json doc;
    doc["D"] = point_estimate;
    doc["ci"] = {r.ci_lower, r.ci_upper};
    doc["gamma"] = r.gamma;
    doc["B"] = r.B;
    doc["dropped"] = r.dropped;
    doc["seed"] = r.seed;
    doc["d_samples"] = r.d_samples;
    out << doc.dump(1) << '\n';
}

void write_band_csv(std::ostream& out, const Band& band) {
    out << "x,lower,upper\n";
    for (std::size_t i = 0; i < band.x.size(); ++i) {
        out << format_real(band.x[i]) << ',' << format_real(band.lower[i]) << ',' << format_real(band.upper[i])
            << '\n';
    }
}

void write_band_json(std::ostream& out, const Band& band) {
    nlohmann::json doc;
    doc["x"] = band.x;
    doc["lower"] = band.lower;
    doc["upper"] = band.upper;
    out << doc.dump(1) << '\n';
}

namespace {

std::vector<std::vector<std::size_t>> orderings_by_label(const RankingTable& table) {
    std::vector<std::size_t> perm(table.models.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> all;
    do {
        all.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) { return table.label(a) < table.label(b); });
    return all;
}

}  // namespace

void write_ranking_csv(std::ostream& out, const RankingTable& table, const std::string& row_name) {
    // Every ordering gets a column, as in a full ranking table; beyond a
    // handful of models only the observed orderings are listed.
    std::vector<std::vector<std::size_t>> columns;
    if (table.models.size() <= 6) {
        columns = orderings_by_label(table);
    } else {
        for (const auto& [perm, p] : table.rows) columns.push_back(perm);
    }
    out << "dataset";
    for (const auto& perm : columns) out << ',' << table.label(perm);
    out << '\n' << row_name;
    for (const auto& perm : columns) {
        auto it = table.rows.find(perm);
        out << ',';
        if (it == table.rows.end()) {
            out << '-';
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", it->second);
            out << buf;
        }
    }
    out << '\n';
}

void write_ranking_json(std::ostream& out, const RankingTable& table) {
    nlohmann::json doc;
    doc["models"] = table.models;
    auto rows = nlohmann::json::array();
    for (const auto& [perm, p] : table.rows) rows.push_back({{"ranking", table.label(perm)}, {"probability", p}});
    doc["rows"] = rows;
    out << doc.dump(1) << '\n';
}

}  // namespace multiroc
