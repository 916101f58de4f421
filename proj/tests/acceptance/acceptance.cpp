// One line per acceptance criterion: "[PASS] n name: detail" or "[FAIL] ...".
// Usage: acceptance [criterion numbers...]   (no arguments runs all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multiroc/baselines.hpp"
#include "multiroc/experiments.hpp"
#include "multiroc/pipeline.hpp"
#include "multiroc/rng.hpp"
#include "multiroc/uncertainty.hpp"
#include "oracles.hpp"

using namespace multiroc;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool trace_ok(const FactorizationFit& f) {
    for (std::size_t i = 1; i < f.deviance_trace.size(); ++i) {
        if (f.deviance_trace[i] > f.deviance_trace[i - 1] + 1e-10) return false;
    }
    return true;
}

// Binary dataset: class-0 probability logistic(+-shift/2 + noise).
ScoredDataset binary_dataset(std::size_t n, std::uint64_t seed, std::vector<double>& pos, std::vector<double>& neg) {
    auto rng = make_rng(seed, 77);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const double shift = u(rng);
    Matrix probs(n, 2);
    std::vector<int> labels(n);
    pos.clear();
    neg.clear();
    for (std::size_t i = 0; i < n; ++i) {
        int y = coin(rng);
        if (i == 0) y = 0;
        if (i == 1) y = 1;
        const double p0 = oracle::logistic((y == 0 ? 0.5 : -0.5) * shift + z(rng));
        probs(i, 0) = p0;
        probs(i, 1) = 1.0 - p0;
        labels[i] = y;
        (y == 0 ? pos : neg).push_back(p0);
    }
    return ScoredDataset(std::move(probs), std::move(labels));
}

Outcome binary_equivalence() {
    double worst = 0.0, slowest = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        std::vector<double> pos, neg;
        const auto data = binary_dataset(500, s, pos, neg);
        const auto t0 = std::chrono::steady_clock::now();
        const double d = evaluate(data).d;
        slowest = std::max(slowest, seconds_since(t0));
        worst = std::max(worst, std::abs(d - oracle::trapezoid_auc(pos, neg)));
    }
    return {worst <= 0.02 && slowest < 1.0,
            "max |D - AUC| = " + fmt("%.4f", worst) + ", slowest " + fmt("%.3f", slowest) + " s"};
}

ScoredDataset fitted(const SimulationConfig& cfg, std::size_t d, bool noise = false) {
    const auto data = generate_multinomial(cfg);
    if (noise) return fit_multinomial(noise_covariates(cfg.n, cfg.p, cfg.seed), cfg.p, data.truth.labels(), cfg.k);
    return fit_multinomial(data.covariates, d, data.truth.labels(), cfg.k);
}

Outcome perfect_classifier() {
    SimulationConfig cfg;
    cfg.label_mode = LabelMode::deterministic;
    const double d = evaluate(fitted(cfg, cfg.p)).d;
    return {d >= 0.995, "D = " + fmt("%.4f", d) + " (need >= 0.995)"};
}

Outcome random_classifier() {
    SimulationConfig cfg;
    const double d = evaluate(fitted(cfg, cfg.p, true)).d;
    return {d >= 0.47 && d <= 0.53, "D = " + fmt("%.4f", d) + " (need [0.47, 0.53])"};
}

Outcome discriminative_ordering() {
    SimulationConfig cfg;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> ds(10);
    for (std::size_t i = 0; i < 10; ++i) ds[i] = i + 1;
    const auto res = discriminative_experiment(cfg, ds);
    const double secs = seconds_since(t0);
    std::vector<double> D;
    std::string list;
    for (std::size_t i = 0; i < 10; ++i) {
        D.push_back(res.records[i].d);
        list += (i ? " " : "") + fmt("%.3f", res.records[i].d);
    }
    // Rank agreement with at most one swap, and that swap between neighbours.
    int inversions = 0;
    bool adjacent = true;
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = i + 1; j < 10; ++j) {
            if (D[i] > D[j]) {
                ++inversions;
                adjacent = adjacent && j == i + 1;
            }
        }
    }
    return {inversions <= 1 && adjacent && secs < 120,
            "D by d: " + list + "; inversions " + std::to_string(inversions) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome skew_invariance() {
    SimulationConfig cfg;
    SkewnessOptions opts;
    const auto t0 = std::chrono::steady_clock::now();
    const auto records = skewness_experiment(cfg, opts);
    const double secs = seconds_since(t0);
    std::map<std::string, std::pair<double, double>> range;
    for (const auto& r : records) {
        auto [it, fresh] = range.try_emplace(r.name, r.d, r.d);
        it->second.first = std::min(it->second.first, r.d);
        it->second.second = std::max(it->second.second, r.d);
    }
    double worst = 0.0;
    std::string worst_cell;
    for (const auto& [name, lohi] : range) {
        if (lohi.second - lohi.first >= worst) {
            worst = lohi.second - lohi.first;
            worst_cell = name;
        }
    }
    return {range.size() == 9 && worst < 0.05 && secs < 300,
            "widest range " + fmt("%.4f", worst) + " at " + worst_cell + " over " + std::to_string(range.size()) +
                " cells, " + fmt("%.1f", secs) + " s"};
}

Outcome cost_monotonicity() {
    SimulationConfig cfg;
    WeightsOptions opts;
    const auto records = weights_experiment(cfg, opts);
    bool increasing = true;
    for (std::size_t i = 1; i < records.size(); ++i) increasing = increasing && records[i].d > records[i - 1].d;
    double d1 = 0, d10 = 0, d01 = 0;
    for (const auto& r : records) {
        if (r.parameter == 1.0) d1 = r.d;
        if (std::abs(r.parameter - 10.0) < 1e-9) d10 = r.d;
        if (std::abs(r.parameter - 0.1) < 1e-12) d01 = r.d;
    }
    const bool pass = increasing && d1 >= 0.45 && d1 <= 0.55 && d10 > 0.9 && d01 < 0.1;
    return {pass, std::string("strictly increasing: ") + (increasing ? "yes" : "no") + ", D(0.1) = " +
                      fmt("%.4f", d01) + ", D(1) = " + fmt("%.4f", d1) + ", D(10) = " + fmt("%.4f", d10)};
}

Outcome u_statistic() {
    std::mt19937_64 rng(2024);
    int mismatches = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t k = 2 + rng() % 4;
        const std::size_t n = k + rng() % (201 - k);
        // Coarse grid so ties are common.
        const int grid = 1 + static_cast<int>(rng() % 20);
        Matrix probs(n, k);
        std::vector<int> labels(n);
        std::vector<std::vector<double>> rows(n, std::vector<double>(k));
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> w(k);
            double s = 0;
            for (auto& x : w) s += x = 1.0 + static_cast<double>(rng() % grid);
            for (std::size_t c = 0; c < k; ++c) rows[i][c] = probs(i, c) = w[c] / s;
            labels[i] = static_cast<int>(i < k ? i : rng() % k);
        }
        const ScoredDataset data(probs, labels);
        for (const auto& pair : enumerate_pairs(k)) {
            std::vector<double> pos, neg;
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] == (int)pair.pos) pos.push_back(data.prob(i, pair.pos));
                if (labels[i] == (int)pair.neg) neg.push_back(data.prob(i, pair.pos));
            }
            if (mann_whitney_auc(data, pair).value != oracle::pairwise_auc(pos, neg)) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatching pairs over 100 instances"};
}

Outcome hand_till() {
    // Perfect: one-hot probabilities on the true class.
    std::mt19937_64 rng(5);
    const std::size_t n = 3000, k = 5;
    Matrix onehot(n, k), noise(n, k);
    std::vector<int> labels(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(i % k);
        onehot(i, labels[i]) = 1.0;
        double s = 0;
        for (std::size_t c = 0; c < k; ++c) s += noise(i, c) = u(rng);
        for (std::size_t c = 0; c < k; ++c) noise(i, c) /= s;
    }
    const double perfect = hand_till_m(ScoredDataset(onehot, labels));
    const double random = hand_till_m(ScoredDataset(noise, labels));
    return {perfect == 1.0 && random >= 0.45 && random <= 0.55,
            "perfect M = " + fmt("%.17g", perfect) + ", random M = " + fmt("%.4f", random)};
}

Outcome irls_health() {
    // Rank-1 recovery on synthetic binomial data.
    std::mt19937_64 rng(11);
    const std::size_t R = 40, K = 12;
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> lam(R), v(K);
    double norm = 0;
    for (auto& x : v) {
        x = 1.0 + 0.5 * z(rng);
        norm += x * x;
    }
    for (auto& x : v) x /= std::sqrt(norm);
    for (std::size_t r = 0; r < R; ++r) lam[r] = -8.0 + 16.0 * static_cast<double>(r) / (R - 1);
    StackedProblem prob{Matrix(R, K), Matrix(R, K, 10000.0), Matrix(R, K, 1.0)};
    Matrix truth(R, K);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < K; ++c) {
            truth(r, c) = lam[r] * v[c];
            std::binomial_distribution<int> b(10000, oracle::logistic(truth(r, c)));
            prob.rates(r, c) = b(rng) / 10000.0;
        }
    }
    const auto f = fit(prob);
    double sq = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) sq += std::pow(f.eta.data()[i] - truth.data()[i], 2);
    const double rms = std::sqrt(sq / static_cast<double>(truth.size()));

    // Deviance traces over the fits the other criteria perform.
    std::size_t fits = 1, bad = trace_ok(f) ? 0 : 1;
    for (std::uint64_t s = 0; s < 50; ++s) {
        std::vector<double> pos, neg;
        ++fits;
        if (!trace_ok(evaluate(binary_dataset(500, s, pos, neg)).fit)) ++bad;
    }
    SimulationConfig cfg;
    std::vector<std::size_t> ds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    for (const auto& r : discriminative_experiment(cfg, ds).records) {
        fits += 2;
        if (!r.monotone) ++bad;
    }
    for (const auto& r : weights_experiment(cfg, {})) {
        fits += 2;
        if (!r.monotone) ++bad;
    }
    SkewnessOptions sk;
    sk.replicates = 5;
    for (const auto& r : skewness_experiment(cfg, sk)) {
        fits += 2;
        if (!r.monotone) ++bad;
    }
    return {rms <= 0.05 && bad == 0, "rank-1 RMS = " + fmt("%.4f", rms) + "; non-monotone traces " +
                                         std::to_string(bad) + " of " + std::to_string(fits) + " fits"};
}

Outcome bootstrap_sanity() {
    SimulationConfig cfg;
    cfg.n = 600;
    cfg.k = 3;
    const auto data = fitted(cfg, 2);
    const auto ev = evaluate(data);

    BootstrapOptions opts;
    opts.seed = 99;
    const auto a = bootstrap(ev.rates, ev.fit, ev.costs, opts);
    const auto b = bootstrap(ev.rates, ev.fit, ev.costs, opts);
    const bool same = a.d_samples == b.d_samples;

    auto big = ev.rates;
    for (auto& n : big.n_pos) n *= 4;
    for (auto& n : big.n_neg) n *= 4;
    const auto big_costs = cardinality_weights(big, WeightMode::unweighted);
    const auto big_fit = fit(big, big_costs);
    std::vector<double> ratio;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        opts.seed = s;
        const double w1 = bootstrap(ev.rates, ev.fit, ev.costs, opts).width();
        const double w4 = bootstrap(big, big_fit, big_costs, opts).width();
        ratio.push_back(w4 / w1);
    }
    std::sort(ratio.begin(), ratio.end());
    const double median = (ratio[4] + ratio[5]) / 2;
    return {same && median < 1.0, std::string("bitwise repeat: ") + (same ? "yes" : "no") +
                                      ", median width ratio (4x trials / 1x) = " + fmt("%.3f", median)};
}

// Iris, even rows train and odd rows test. One model sees the real features,
// the other independent noise of the same shape.
Outcome ranking_agreement() {
    std::ifstream in(MULTIROC_TEST_DATA "/iris.csv");
    if (!in) return {false, "cannot open iris.csv"};
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::vector<double> row;
        for (std::string f; std::getline(ss, f, ',');) row.push_back(std::stod(f));
        labels.push_back(static_cast<int>(row.back()));
        row.pop_back();
        feats.push_back(row);
    }
    const std::size_t n = feats.size(), p = feats[0].size();
    const Matrix noise = noise_covariates(n, p, 3);

    auto split = [&](const auto& get, bool train) {
        Matrix X((n + (train ? 1 : 0)) / 2, p);
        std::vector<int> y;
        std::size_t r = 0;
        for (std::size_t i = train ? 0 : 1; i < n; i += 2, ++r) {
            for (std::size_t c = 0; c < p; ++c) X(r, c) = get(i, c);
            y.push_back(labels[i]);
        }
        return std::make_pair(X, y);
    };
    auto score = [&](const auto& get) {
        auto [Xtr, ytr] = split(get, true);
        auto [Xte, yte] = split(get, false);
        const auto model = fit_multinomial_model(Xtr, p, ytr, 3);
        return ScoredDataset(predict_probabilities(model, Xte), yte);
    };
    const auto real = score([&](std::size_t i, std::size_t c) { return feats[i][c]; });
    const auto fake = score([&](std::size_t i, std::size_t c) { return noise(i, c); });

    const auto er = evaluate(real), ef = evaluate(fake);
    BootstrapOptions opts;
    opts.seed = 1;
    const auto br = bootstrap(er.rates, er.fit, er.costs, opts);
    const auto bf = bootstrap(ef.rates, ef.fit, ef.costs, opts);
    const auto table = ranking_probabilities(std::vector<BootstrapResult>{br, bf}, {"features", "noise"});
    const double p_real_first = table.rows.count({0, 1}) ? table.rows.at({0, 1}) : 0.0;
    const double mr = hand_till_m(real), mf = hand_till_m(fake);
    return {p_real_first == 1.0 && mr > mf && er.d > ef.d,
            "P(features>noise) = " + fmt("%.2f", p_real_first) + "; D " + fmt("%.4f", er.d) + " vs " +
                fmt("%.4f", ef.d) + "; M " + fmt("%.4f", mr) + " vs " + fmt("%.4f", mf)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"binary equivalence", binary_equivalence},
        {"perfect classifier", perfect_classifier},
        {"random classifier", random_classifier},
        {"discriminative ordering", discriminative_ordering},
        {"skew invariance", skew_invariance},
        {"cost-weight monotonicity", cost_monotonicity},
        {"U-statistic oracle", u_statistic},
        {"Hand-Till extremes", hand_till},
        {"IRLS health", irls_health},
        {"bootstrap determinism and width", bootstrap_sanity},
        {"ranking agreement on a public dataset", ranking_agreement},
    };
    std::vector<std::size_t> chosen;
    for (int i = 1; i < argc; ++i) chosen.push_back(std::stoul(argv[i]));
    if (chosen.empty()) {
        for (std::size_t i = 1; i <= criteria.size(); ++i) chosen.push_back(i);
    }
    int failures = 0;
    for (std::size_t id : chosen) {
        if (id < 1 || id > criteria.size()) {
            std::printf("[FAIL] %zu unknown criterion\n", id);
            ++failures;
            continue;
        }
        const auto& [name, run] = criteria[id - 1];
        Outcome o{false, ""};
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
