#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "multiroc/errors.hpp"
#include "multiroc/experiments.hpp"
#include "multiroc/pipeline.hpp"
#include "multiroc/uncertainty.hpp"
#include "oracles.hpp"

using namespace multiroc;
using Samples = std::vector<std::vector<double>>;

namespace {

ScoredDataset simulated(std::size_t d, std::uint64_t seed, std::size_t n = 2000) {
    SimulationConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    const auto data = generate_multinomial(cfg);
    const Matrix x = d == 0 ? noise_covariates(n, cfg.p, seed + 99) : data.covariates;
    return fit_multinomial(x, d == 0 ? cfg.p : d, data.truth.labels(), cfg.k);
}

// Every cell at the same logit, constant in both blocks.
PairwiseRates synthetic(double eta_tp, double eta_fp, std::size_t trials, std::size_t T = 10, std::size_t k = 3) {
    PairwiseRates r;
    const std::size_t K = k * (k - 1);
    r.mtp = Matrix(T, K, oracle::logistic(eta_tp));
    r.mfp = Matrix(T, K, oracle::logistic(eta_fp));
    r.thresholds = Matrix(T, K);
    r.n_pos.assign(K, trials);
    r.n_neg.assign(K, trials);
    for (std::size_t t = 0; t < T; ++t) r.quantile_levels.push_back(1.0 - static_cast<double>(t) / (T - 1));
    r.pairs = enumerate_pairs(k);
    return r;
}

BootstrapResult run(const Evaluation& e, std::size_t B, double gamma = 0.95, std::uint64_t seed = 7) {
    BootstrapOptions o;
    o.B = B;
    o.gamma = gamma;
    o.seed = seed;
    return bootstrap(e.rates, e.fit, e.costs, o);
}

}  // namespace

TEST_CASE("quantile matches the oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    std::vector<double> xs(37);
    for (auto& x : xs) x = z(rng);
    for (double q : {0.0, 0.025, 0.1, 0.5, 0.9, 0.975, 1.0}) {
        CHECK(quantile(xs, q) == doctest::Approx(oracle::quantile(xs, q)).epsilon(1e-14));
    }
    const std::vector<double> one{3.0};
    CHECK(quantile(one, 0.3) == 3.0);
    CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), EmptyScores);
    const auto [lo, hi] = percentile_interval(xs, 0.9);
    CHECK(lo == doctest::Approx(oracle::quantile(xs, 0.05)));
    CHECK(hi == doctest::Approx(oracle::quantile(xs, 0.95)));
}

TEST_CASE("bootstrap is reproducible and nests intervals") {
    const auto e = evaluate(simulated(3, 11));
    const auto a = run(e, 40);
    const auto b = run(e, 40);
    CHECK(a.d_samples == b.d_samples);
    CHECK(a.ci_lower == b.ci_lower);
    CHECK(a.ci_upper == b.ci_upper);
    CHECK(a.dropped == 0);
    CHECK(a.d_samples.size() == 40);
    const auto c = run(e, 40, 0.95, 8);
    CHECK(c.d_samples != a.d_samples);

    // Same samples, wider level.
    const auto [lo99, hi99] = percentile_interval(a.d_samples, 0.99);
    const auto [lo90, hi90] = percentile_interval(a.d_samples, 0.90);
    CHECK(lo99 <= lo90);
    CHECK(hi99 >= hi90);
    CHECK(a.ci_lower <= e.d + 0.05);
    CHECK(a.ci_upper >= e.d - 0.05);
}

TEST_CASE("interval width tracks information") {
    SUBCASE("perfect fit concentrates at one") {
        const auto r = synthetic(6.0, -6.0, 10000);
        const auto f = fit(r, cardinality_weights(r, WeightMode::unweighted));
        BootstrapOptions o;
        o.B = 100;
        const auto b = bootstrap(r, f, cardinality_weights(r, WeightMode::unweighted), o);
        for (double d : b.d_samples) CHECK(d > 0.99);
        CHECK(b.width() < 0.01);
    }
    SUBCASE("random fit covers one half") {
        const auto r = synthetic(0.0, 0.0, 10000);
        const auto costs = cardinality_weights(r, WeightMode::unweighted);
        BootstrapOptions o;
        o.B = 100;
        const auto b = bootstrap(r, fit(r, costs), costs, o);
        CHECK(b.ci_lower <= 0.5);
        CHECK(b.ci_upper >= 0.5);
    }
    SUBCASE("halving the trials widens the interval") {
        const auto e = evaluate(simulated(2, 13));
        auto halved = e.rates;
        for (auto& c : halved.n_pos) c /= 2;
        for (auto& c : halved.n_neg) c /= 2;
        const auto costs = cardinality_weights(halved, WeightMode::unweighted);
        const auto refit = fit(halved, costs);
        std::vector<double> full, half;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            BootstrapOptions o;
            o.B = 40;
            o.seed = seed;
            full.push_back(bootstrap(e.rates, e.fit, e.costs, o).width());
            half.push_back(bootstrap(halved, refit, costs, o).width());
        }
        CHECK(oracle::quantile(half, 0.5) > oracle::quantile(full, 0.5));
    }
}

TEST_CASE("bootstrap argument checks") {
    const auto e = evaluate(simulated(2, 14, 500));
    BootstrapOptions o;
    o.B = 1;
    CHECK_THROWS_AS(bootstrap(e.rates, e.fit, e.costs, o), InputError);
    o.B = 10;
    o.gamma = 1.0;
    CHECK_THROWS_AS(bootstrap(e.rates, e.fit, e.costs, o), InputError);
    auto unconverged = e.fit;
    unconverged.converged = false;
    CHECK_THROWS_AS(bootstrap(e.rates, unconverged, e.costs, {}), NoConvergence);
}

TEST_CASE("replicate drop accounting") {
    BootstrapOptions o;
    o.B = 10;
    std::vector<std::optional<ReplicateOutcome>> outs(10);
    for (std::size_t i = 0; i < 8; ++i) outs[i] = ReplicateOutcome{0.5 + 0.01 * static_cast<double>(i), {}};
    const auto r = summarize_replicates(outs, o);
    CHECK(r.dropped == 2);
    CHECK(r.d_samples.size() == 8);
    outs[7].reset();
    CHECK_THROWS_AS(summarize_replicates(outs, o), InsufficientReplicates);
}

TEST_CASE("curve band") {
    RocCurve lo, hi;
    lo.points = {{0, 0}, {0.5, 0.5}, {1, 1}};
    hi.points = {{0, 0}, {0.5, 0.9}, {1, 1}};
    const auto band = curve_band({lo, hi}, 0.95, 101);
    REQUIRE(band.x.size() == 101);
    CHECK(band.x[50] == doctest::Approx(0.5));
    CHECK(band.lower[50] == doctest::Approx(0.5 + 0.025 * 0.4));
    CHECK(band.upper[50] == doctest::Approx(0.9 - 0.025 * 0.4));
    for (std::size_t i = 0; i < band.x.size(); ++i) CHECK(band.lower[i] <= band.upper[i]);
    std::ostringstream csv;
    write_band_csv(csv, band);
    CHECK(csv.str().rfind("x,lower,upper\n0,0,0\n", 0) == 0);
}

TEST_CASE("ranking probabilities") {
    const std::vector<std::string> names{"a", "b", "c"};
    SUBCASE("clear separation") {
        const std::vector<std::vector<double>> s{{0.9, 0.91, 0.92}, {0.7, 0.71, 0.69}, {0.5, 0.52, 0.51}};
        const auto t = ranking_probabilities(s, names);
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows.begin()->first == std::vector<std::size_t>{0, 1, 2});
        CHECK(t.rows.begin()->second == 1.0);
        CHECK(t.label({0, 1, 2}) == "a>b>c");
    }
    SUBCASE("probabilities sum to one and ties go to the earlier model") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u;
        std::vector<std::vector<double>> s(3, std::vector<double>(200));
        for (auto& m : s) {
            for (auto& x : m) x = std::round(u(rng) * 4) / 4;
        }
        const auto t = ranking_probabilities(s, names);
        double sum = 0;
        for (const auto& [perm, p] : t.rows) sum += p;
        CHECK(sum == doctest::Approx(1.0));
        const auto tied = ranking_probabilities(Samples{{0.5, 0.5}, {0.5, 0.5}}, {"x", "y"});
        CHECK(tied.rows.at({0, 1}) == 1.0);
    }
    SUBCASE("one model") {
        const auto t = ranking_probabilities(Samples{{0.6, 0.7}}, {"only"});
        CHECK(t.rows.at({0}) == 1.0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ranking_probabilities(Samples{{0.5, 0.6}, {0.5}}, {"a", "b"}), MismatchedB);
        CHECK_THROWS_AS(ranking_probabilities(Samples{{0.5}}, {"a", "b"}), DimensionMismatch);
        CHECK_THROWS_AS(ranking_probabilities(std::vector<std::vector<double>>{}, std::vector<std::string>{}), InputError);
    }
    SUBCASE("csv layout") {
        const auto t = ranking_probabilities(Samples{{0.9, 0.4, 0.9, 0.9}, {0.5, 0.5, 0.5, 0.5}}, {"a", "b"});
        std::ostringstream out;
        write_ranking_csv(out, t, "iris");
        CHECK(out.str() == "dataset,a>b,b>a\niris,0.75,0.25\n");
        const auto one = ranking_probabilities(Samples{{0.9}, {0.5}, {0.1}}, names);
        std::ostringstream out3;
        write_ranking_csv(out3, one, "d");
        CHECK(out3.str() == "dataset,a>b>c,a>c>b,b>a>c,b>c>a,c>a>b,c>b>a\nd,1.00,-,-,-,-,-\n");
    }
}
