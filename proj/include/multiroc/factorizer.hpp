#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "multiroc/matrix.hpp"
#include "multiroc/pairwise_rates.hpp"

namespace multiroc {

// Per-cell multiplicative misclassification-cost weights, one T×K matrix for
// the TPR rows and one for the FPR rows. All entries finite and positive.
struct CostWeights {
    Matrix q_tp;
    Matrix q_fp;

    // Throws NonPositiveWeight / DimensionMismatch.
    void validate(std::size_t T, std::size_t K) const;
    bool operator==(const CostWeights&) const = default;
};

// Elementwise product; composes e.g. a cost schedule with the unweighted base.
CostWeights operator*(const CostWeights& a, const CostWeights& b);
CostWeights scaled(const CostWeights& w, double factor);
// Broadcasts per-column weights down T rows.
CostWeights column_weights(std::size_t T, const std::vector<double>& tp, const std::vector<double>& fp);

enum class WeightMode {
    weighted,    // Q = 1: each cell weighted by its binomial trial count
    unweighted,  // Q = 1/trials: every cell has effective weight 1
    custom,      // caller-supplied Q
};

CostWeights cardinality_weights(const PairwiseRates& rates, WeightMode mode,
                                const std::optional<CostWeights>& custom = std::nullopt);

void write_weights_csv(std::ostream& out, const CostWeights& w, const std::vector<PairIndex>& pairs);
// Reads a 2T×K CSV (header of pair labels; first T rows TPR weights, next T FPR weights).
CostWeights read_weights_csv(std::istream& in);

// The stacked 2T×K binomial problem: rows 0..T-1 are TPR cells with n_pos
// trials, rows T..2T-1 FPR cells with n_neg trials.
struct StackedProblem {
    Matrix rates;
    Matrix trials;
    Matrix q;

    std::size_t rows() const noexcept { return rates.rows(); }
    std::size_t cols() const noexcept { return rates.cols(); }
    Matrix effective_weights() const;  // trials ∘ q
    double max_trials() const;
};

StackedProblem stack(const PairwiseRates& rates, const CostWeights& costs);

struct FitOptions {
    int max_iter = 500;
    double tol = 1e-8;
    // Boundary rates are clamped to [eps, 1 - eps]; defaults to 0.5 / max trials.
    std::optional<double> clamp_eps;
    int max_halvings = 20;
    int power_iterations = 100;
    double power_tol = 1e-10;
};

struct FactorizationFit {
    std::vector<double> lambda;  // length 2T: TPR rows then FPR rows
    std::vector<double> v;       // length K, unit norm, first nonzero entry positive
    Matrix eta;                  // lambda v^T
    Matrix weights;              // effective weights trials ∘ Q
    std::vector<double> deviance_trace;  // [0] is the starting point, then one per sweep
    bool converged = false;
    int iterations = 0;
    double clamp_eps = 0.0;

    std::size_t T() const noexcept { return lambda.size() / 2; }
    double final_deviance() const { return deviance_trace.empty() ? 0.0 : deviance_trace.back(); }
};

// Weighted rank-1 binomial factorization with logit link, fitted by
// alternating Fisher-scoring (IRLS) sweeps over the row and column factors.
// Never throws NoConvergence itself: a fit that hits max_iter comes back with
// converged == false. Throws NumericalDegeneracy when a scoring denominator
// underflows.
FactorizationFit fit(const PairwiseRates& rates, const CostWeights& costs, const FitOptions& opts = {});
FactorizationFit fit(const StackedProblem& problem, const FitOptions& opts = {});

// Throws NoConvergence if the fit did not converge.
const FactorizationFit& require_converged(const FactorizationFit& f);

// Weighted binomial deviance sum_ij w_ij d(M_ij, logistic(eta_ij)).
double deviance(const Matrix& observed, const Matrix& eta, const Matrix& weights);
double deviance(const PairwiseRates& rates, const Matrix& eta, const Matrix& weights);
// 2 [y log(y/mu) + (1-y) log((1-y)/(1-mu))] with mu = logistic(eta), 0 log 0 = 0.
double unit_deviance(double y, double eta);

double logistic(double x);
double logit(double p);

struct CenteredComponents {
    std::vector<double> lambda0_tp;  // length T
    std::vector<double> lambda0_fp;  // length T
    Matrix residual;                 // eta minus its row means
};

// Projects eta onto the constant-column direction: lambda0 are the row means.
CenteredComponents center(const FactorizationFit& f);
CenteredComponents center(const Matrix& eta);

void write_fit_json(std::ostream& out, const FactorizationFit& f, const CenteredComponents& c);

}  // namespace multiroc
