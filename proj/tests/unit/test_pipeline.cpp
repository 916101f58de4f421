#include <cmath>

#include "doctest.h"
#include "multiroc/baselines.hpp"
#include "multiroc/errors.hpp"
#include "multiroc/experiments.hpp"
#include "multiroc/pipeline.hpp"
#include "oracles.hpp"

using namespace multiroc;

namespace {

ScoredDataset fitted(std::size_t d, std::size_t k = 2, std::size_t n = 3000) {
    SimulationConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.seed = 31;
    const auto data = generate_multinomial(cfg);
    return fit_multinomial(data.covariates, d, data.truth.labels(), k);
}

}  // namespace

TEST_CASE("evaluate chains the stages") {
    const auto ds = fitted(4, 3);
    const auto e = evaluate(ds);
    CHECK(e.rates.T() == 50);
    CHECK(e.rates.K() == 6);
    CHECK(e.fit.converged);
    CHECK(e.fit.eta.rows() == 100);
    CHECK(e.centered.lambda0_tp.size() == 50);
    CHECK(e.curve.points.size() == 52);
    CHECK(e.d == doctest::Approx(trapezoid_area(e.curve.points)));
    CHECK(e.d > 0.5);

    EvaluateOptions o;
    o.thresholds = 10;
    o.mode = WeightMode::weighted;
    const auto w = evaluate(ds, o);
    CHECK(w.rates.T() == 10);
    for (double q : w.costs.q_tp.data()) CHECK(q == 1.0);
}

TEST_CASE("binary D tracks the pair AUCs") {
    for (std::size_t d : {1, 3, 10}) {
        const auto ds = fitted(d);
        const double auc = mann_whitney_auc(ds, enumerate_pairs(2)[0]).value;
        CHECK(std::abs(evaluate(ds).d - auc) < 0.02);
    }
}

TEST_CASE("extra costs multiply the base weights") {
    const auto ds = fitted(2, 3, 1500);
    EvaluateOptions o;
    o.thresholds = 20;
    const auto base = evaluate(ds, o);
    o.extra = CostWeights{Matrix(20, 6, 2.0), Matrix(20, 6, 2.0)};
    const auto doubled = evaluate(ds, o);
    for (std::size_t i = 0; i < base.costs.q_tp.size(); ++i) {
        CHECK(doubled.costs.q_tp.data()[i] == 2.0 * base.costs.q_tp.data()[i]);
    }
    // a global factor does not move the fit
    CHECK(doubled.d == doctest::Approx(base.d).epsilon(1e-6));
    o.extra = CostWeights{Matrix(19, 6, 1.0), Matrix(19, 6, 1.0)};
    CHECK_THROWS_AS(evaluate(ds, o), DimensionMismatch);
}
