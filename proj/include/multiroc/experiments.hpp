#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multiroc/dataset.hpp"
#include "multiroc/factorizer.hpp"
#include "multiroc/matrix.hpp"
#include "multiroc/pipeline.hpp"

namespace multiroc {

enum class LabelMode { random, deterministic };

struct SimulationConfig {
    std::size_t n = 10000;
    std::size_t p = 10;
    std::size_t k = 5;
    std::size_t d = 10;  // covariates available to the fitted classifier
    std::uint64_t seed = 1;
    LabelMode label_mode = LabelMode::random;

    void validate() const;
};

struct SimulatedData {
    ScoredDataset truth;  // generating probabilities and labels
    Matrix covariates;    // n×p, standard normal
    Matrix coefficients;  // p×(k-1), entries ~ N(1, 1)
};

// Class probabilities softmax((1, x_i B)): class 0 has the constant logit 1,
// class c >= 1 the logit x_i · B[:, c-1]. Labels are multinomial draws
// (random) or the row argmax (deterministic).
SimulatedData generate_multinomial(const SimulationConfig& config);

// Independent standard-normal covariates, for the "random classifier".
Matrix noise_covariates(std::size_t n, std::size_t p, std::uint64_t seed);

struct MultinomialOptions {
    int max_iter = 1000;
    double tol = 1e-8;  // relative log-likelihood change
};

// Multinomial logistic regression with intercept, class 0 as reference.
struct MultinomialModel {
    Matrix coef;  // (d+1)×(k-1); row 0 is the intercept
    std::size_t k = 0;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    bool separation_warning = false;  // some fitted probability exceeded 1 - 1e-12

    std::size_t d() const noexcept { return coef.rows() - 1; }
};

// Maximum likelihood by gradient ascent with a backtracking line search on
// the first `d` columns of `covariates`.
MultinomialModel fit_multinomial_model(const Matrix& covariates, std::size_t d, const std::vector<int>& labels,
                                       std::size_t k, const MultinomialOptions& opts = {});
Matrix predict_probabilities(const MultinomialModel& model, const Matrix& covariates);

// Fitted in-sample probabilities paired with the labels.
ScoredDataset fit_multinomial(const Matrix& covariates, std::size_t d, const std::vector<int>& labels,
                              std::size_t k, const MultinomialOptions& opts = {});

double skew_statistic(const std::vector<double>& weights);  // max_i w_i / min_j w_j

struct SkewSample {
    ScoredDataset dataset;
    std::vector<double> weights;      // Dirichlet draw
    std::vector<std::size_t> rows;    // kept observations (ascending)
    ClassCounts counts;
    double z = 0.0;                   // skew statistic of the weights
};

// Draws w ~ Dirichlet(alpha, ..., alpha) and keeps round(w_c * n_target)
// observations of class c, sampled without replacement and capped by the
// class pool. n_target defaults to the dataset size. A draw that leaves a
// class empty is redrawn, up to 100 times (then EmptyClassAfterSampling).
SkewSample dirichlet_skew(const ScoredDataset& dataset, double alpha, std::uint64_t seed,
                          std::optional<std::size_t> n_target = std::nullopt);

std::vector<double> dirichlet_draw(std::size_t k, double alpha, std::uint64_t seed, std::size_t stream = 0);

// Row indices of an equal-size per-class subsample (ascending).
std::vector<std::size_t> balanced_rows(const ScoredDataset& dataset, std::uint64_t seed,
                                       std::optional<std::size_t> n_sub = std::nullopt);

// Equal-size per-class subsample (n_sub per class, capped by the smallest
// class when omitted).
ScoredDataset balanced_subsample(const ScoredDataset& dataset, std::uint64_t seed,
                                 std::optional<std::size_t> n_sub = std::nullopt);

// Every row puts 0.5 + margin on `majority_class` and splits the rest evenly.
ScoredDataset majority_classifier(const ScoredDataset& dataset, std::size_t majority_class, double margin = 0.2);

// TPR weight c on pairs classified as the majority, 1/c on pairs referencing
// it, 1 elsewhere; FPR weights the reciprocal pattern. Constant down columns.
CostWeights cost_schedule(std::size_t T, std::size_t k, std::size_t majority_class, double c);

std::size_t largest_class(const ClassCounts& counts);

// ---- experiment sweeps -------------------------------------------------

struct CurveRecord {
    std::string name;
    double parameter = 0.0;  // d, c, ... depending on the sweep
    double d = 0.0;           // the sweep's headline statistic (unweighted base)
    double d_weighted = 0.0;  // same evaluation on the cardinality-weighted base
    double z = 0.0;
    std::size_t replicate = 0;
    RocCurve curve;  // unweighted curve unless stated otherwise
    bool converged = true;
    bool monotone = true;  // deviance trace non-increasing
};

struct DiscriminativeResult {
    SimulatedData data;
    std::vector<CurveRecord> records;  // d = 1..p, then the noise classifier
    std::vector<ScoredDataset> scored;  // parallel to records
};

DiscriminativeResult discriminative_experiment(const SimulationConfig& config, const std::vector<std::size_t>& ds,
                                               std::size_t thresholds = 50);

struct SkewnessOptions {
    std::vector<std::size_t> ds = {2, 5, 9};
    std::vector<double> alphas = {2, 5, 9};
    std::size_t replicates = 30;
    std::optional<std::size_t> n_sub;
    std::size_t thresholds = 50;
};

std::vector<CurveRecord> skewness_experiment(const SimulationConfig& config, const SkewnessOptions& opts);

struct WeightsOptions {
    std::vector<double> cs;  // defaults to 0.1..0.9, 1, 1/0.9..1/0.1
    std::size_t thresholds = 50;
};

std::vector<double> default_cost_grid();

// Majority classifier on simulated labels, weighted by the cost schedule on
// top of the unweighted base, one record per c.
std::vector<CurveRecord> weights_experiment(const SimulationConfig& config, const WeightsOptions& opts);

}  // namespace multiroc
