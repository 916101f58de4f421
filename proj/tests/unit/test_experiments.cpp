#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "multiroc/baselines.hpp"
#include "multiroc/errors.hpp"
#include "multiroc/experiments.hpp"
#include "oracles.hpp"

using namespace multiroc;

namespace {

SimulationConfig small(std::size_t n = 2000, std::uint64_t seed = 3) {
    SimulationConfig c;
    c.n = n;
    c.seed = seed;
    return c;
}

double mean_z(std::size_t k, double alpha, std::uint64_t seed) {
    double s = 0;
    for (std::size_t i = 0; i < 400; ++i) s += std::log(skew_statistic(dirichlet_draw(k, alpha, seed, i)));
    return s / 400;
}

}  // namespace

TEST_CASE("generated probabilities") {
    auto cfg = small();
    cfg.label_mode = LabelMode::deterministic;
    const auto data = generate_multinomial(cfg);
    CHECK(data.covariates.rows() == cfg.n);
    CHECK(data.covariates.cols() == cfg.p);
    CHECK(data.coefficients.rows() == cfg.p);
    CHECK(data.coefficients.cols() == cfg.k - 1);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const auto row = data.truth.probs().row(i);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        CHECK(data.truth.label(i) == best);
    }
    // softmax of (1, x B) recomputed by hand for one row
    const std::size_t i = 17;
    std::vector<double> logits{1.0};
    for (std::size_t c = 0; c + 1 < cfg.k; ++c) {
        double s = 0;
        for (std::size_t j = 0; j < cfg.p; ++j) s += data.covariates(i, j) * data.coefficients(j, c);
        logits.push_back(s);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double l : logits) z += std::exp(l - mx);
    for (std::size_t c = 0; c < cfg.k; ++c) {
        CHECK(data.truth.prob(i, c) == doctest::Approx(std::exp(logits[c] - mx) / z).epsilon(1e-12));
    }
}

TEST_CASE("generation is a pure function of the seed") {
    const auto a = generate_multinomial(small(500, 9));
    const auto b = generate_multinomial(small(500, 9));
    CHECK(a.truth == b.truth);
    CHECK(a.covariates == b.covariates);
    CHECK_FALSE(generate_multinomial(small(500, 10)).truth == a.truth);

    auto cfg = small(50000, 1);
    const auto counts = class_counts(generate_multinomial(cfg).truth);
    for (auto c : counts.counts) {
        CHECK(c > 1000);
        CHECK(c < 30000);
    }
}

TEST_CASE("config validation") {
    auto c = small();
    c.k = 1;
    CHECK_THROWS_AS(c.validate(), InvalidK);
    c = small();
    c.d = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c.d = 11;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small(3);
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("fitted classifiers order by information") {
    auto cfg = small(3000, 5);
    const auto data = generate_multinomial(cfg);
    std::vector<double> m;
    for (std::size_t d : {1, 3, 6, 10}) {
        m.push_back(hand_till_m(fit_multinomial(data.covariates, d, data.truth.labels(), cfg.k)));
    }
    for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i - 1] <= m[i] + 0.02);
    const auto noise = fit_multinomial(noise_covariates(cfg.n, cfg.p, 77), cfg.p, data.truth.labels(), cfg.k);
    CHECK(hand_till_m(noise) < 0.6);
    CHECK(m.back() > 0.8);
}

TEST_CASE("separation is flagged") {
    // one covariate splits the two classes perfectly
    Matrix x(40, 1);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = i < 20 ? 0 : 1;
        x(i, 0) = (i < 20 ? -1.0 : 1.0) * (1.0 + 0.1 * static_cast<double>(i % 7));
    }
    const auto model = fit_multinomial_model(x, 1, y, 2);
    CHECK(model.separation_warning);
    Matrix noisy(40, 1);
    for (std::size_t i = 0; i < 40; ++i) noisy(i, 0) = std::sin(static_cast<double>(i));
    CHECK_FALSE(fit_multinomial_model(noisy, 1, y, 2).separation_warning);
    CHECK_THROWS_AS(fit_multinomial_model(x, 2, y, 2), InputError);
    CHECK_THROWS_AS(fit_multinomial_model(x, 1, std::vector<int>(3), 2), DimensionMismatch);
}

TEST_CASE("Dirichlet skew") {
    const auto data = generate_multinomial(small(5000, 4));
    const auto flat = dirichlet_skew(data.truth, 1e6, 1);
    CHECK(flat.z == doctest::Approx(1.0).epsilon(0.02));
    CHECK(skew_statistic({0.1, 0.4, 0.5}) == doctest::Approx(5.0));

    const auto s = dirichlet_skew(data.truth, 2.0, 8);
    CHECK(s.dataset.n() == s.rows.size());
    CHECK(std::is_sorted(s.rows.begin(), s.rows.end()));
    CHECK(class_counts(s.dataset) == s.counts);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        CHECK(s.dataset.label(i) == data.truth.label(s.rows[i]));
        for (std::size_t c = 0; c < 5; ++c) CHECK(s.dataset.prob(i, c) == data.truth.prob(s.rows[i], c));
    }
    const auto again = dirichlet_skew(data.truth, 2.0, 8);
    CHECK(again.rows == s.rows);

    CHECK(mean_z(5, 2.0, 1) > mean_z(5, 9.0, 1));
    CHECK(mean_z(10, 5.0, 1) > mean_z(5, 5.0, 1));
    CHECK_THROWS_AS(dirichlet_skew(data.truth, 0.0, 1), InputError);
}

TEST_CASE("balanced subsample") {
    const auto data = generate_multinomial(small(3000, 6));
    const auto b = balanced_subsample(data.truth, 1);
    const auto counts = class_counts(b);
    const auto all = class_counts(data.truth).counts;
    const auto smallest = *std::min_element(all.begin(), all.end());
    for (auto c : counts.counts) CHECK(c == smallest);
    for (auto c : class_counts(balanced_subsample(data.truth, 1, 40)).counts) CHECK(c == 40);
}

TEST_CASE("majority classifier and cost schedule") {
    Matrix m(4, 3, 1.0 / 3);
    const ScoredDataset ds(m, {0, 1, 2, 0});
    const auto maj = majority_classifier(ds, 0);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(maj.prob(i, 0) == doctest::Approx(0.7));
        CHECK(maj.prob(i, 1) == doctest::Approx(0.15));
        CHECK(maj.prob(i, 2) == doctest::Approx(0.15));
    }
    CHECK(maj.labels() == ds.labels());
    CHECK_THROWS_AS(majority_classifier(ds, 3), LabelOutOfRange);

    const auto w = cost_schedule(4, 3, 0, 2.0);
    const std::vector<double> tp{2, 2, 0.5, 1, 0.5, 1};
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t l = 0; l < 6; ++l) {
            CHECK(w.q_tp(t, l) == tp[l]);
            CHECK(w.q_fp(t, l) == 1.0 / tp[l]);
        }
    }
    const auto neutral = cost_schedule(3, 4, 2, 1.0);
    for (double q : neutral.q_tp.data()) CHECK(q == 1.0);
    const auto a = cost_schedule(5, 4, 1, 3.7), b = cost_schedule(5, 4, 1, 1 / 3.7);
    for (std::size_t i = 0; i < a.q_tp.size(); ++i) {
        CHECK(a.q_tp.data()[i] * b.q_tp.data()[i] == doctest::Approx(1.0));
        CHECK(a.q_fp.data()[i] * b.q_fp.data()[i] == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(cost_schedule(3, 3, 0, 0.0), NonPositiveWeight);
    CHECK(largest_class(ClassCounts{{3, 9, 9, 1}}) == 1);

    const auto grid = default_cost_grid();
    CHECK(grid.size() == 19);
    CHECK(grid.front() == doctest::Approx(0.1));
    CHECK(grid[9] == 1.0);
    CHECK(grid.back() == doctest::Approx(10.0));
    CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("discriminative sweep records") {
    const auto r = discriminative_experiment(small(1500, 2), {1, 5, 10}, 20);
    REQUIRE(r.records.size() == 4);
    CHECK(r.records.back().name == "noise");
    CHECK(r.records[0].parameter == 1.0);
    for (const auto& rec : r.records) {
        CHECK(rec.converged);
        CHECK(rec.monotone);
        CHECK(rec.d >= 0.0);
        CHECK(rec.d <= 1.0);
    }
    CHECK(r.records[2].d > r.records[3].d);
    CHECK_THROWS_AS(discriminative_experiment(small(1500, 2), {11}), InputError);
}
