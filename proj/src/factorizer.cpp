#include "multiroc/factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "multiroc/errors.hpp"

namespace multiroc {

namespace {

// Below this many cells the per-row/per-column loops stay serial.
constexpr std::size_t kParallelCells = 1 << 14;

constexpr double kUnderflow = 1e-300;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double clamp_rate(double m, double eps) { return std::clamp(m, eps, 1.0 - eps); }

// One scalar Fisher-scoring update for `coef` in eta_c = coef * x_c over the
// cells that share it, halving the step back toward `coef` while the
// deviance of those cells would rise.
template <typename CellAt>
double scoring_step(double coef, std::size_t count, CellAt cell_at, int max_halvings, bool& degenerate) {
    double num = 0.0;
    double den = 0.0;
    double dev_old = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
        const auto [y, w, x] = cell_at(c);
        const double eta = coef * x;
        const double mu = logistic(eta);
        num += w * (y - mu) * x;
        den += w * mu * (1.0 - mu) * x * x;
        dev_old += w * unit_deviance(y, eta);
    }
    if (den == 0.0 && num == 0.0) return coef;
    if (!(den > kUnderflow)) {
        degenerate = true;
        return coef;
    }

    double step = num / den;
    for (int h = 0; h <= max_halvings; ++h) {
        const double candidate = coef + step;
        double dev_new = 0.0;
        for (std::size_t c = 0; c < count; ++c) {
            const auto [y, w, x] = cell_at(c);
            dev_new += w * unit_deviance(y, candidate * x);
        }
        if (dev_new <= dev_old) return candidate;
        step *= 0.5;
    }
    return coef;
}

struct Triple {
    double y;
    double w;
    double x;
};

void normalize(std::vector<double>& lambda, std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    double sign = 1.0;
    for (double x : v) {
        if (x != 0.0) {
            sign = x > 0.0 ? 1.0 : -1.0;
            break;
        }
    }
    for (auto& x : v) x *= sign / norm;
    for (auto& x : lambda) x *= sign * norm;
}

// Leading singular pair of `m` by power iteration from the all-ones vector.
void rank1_start(const Matrix& m, int steps, double tol, std::vector<double>& lambda, std::vector<double>& v) {
    const std::size_t R = m.rows();
    const std::size_t C = m.cols();
    v.assign(C, 1.0 / std::sqrt(static_cast<double>(C)));
    lambda.assign(R, 0.0);
    std::vector<double> u(R), next(C);
    for (int it = 0; it < steps; ++it) {
        for (std::size_t r = 0; r < R; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < C; ++c) s += m(r, c) * v[c];
            u[r] = s;
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t c = 0; c < C; ++c) next[c] += m(r, c) * u[r];
        }
        double norm = 0.0;
        for (double x : next) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        double change = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            next[c] /= norm;
            change = std::max(change, std::abs(next[c] - v[c]));
        }
        v.swap(next);
        if (change < tol) break;
    }
    for (std::size_t r = 0; r < R; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += m(r, c) * v[c];
        lambda[r] = s;
    }
    normalize(lambda, v);
}

Matrix outer(const std::vector<double>& lambda, const std::vector<double>& v) {
    Matrix eta(lambda.size(), v.size());
    for (std::size_t r = 0; r < lambda.size(); ++r) {
        for (std::size_t c = 0; c < v.size(); ++c) eta(r, c) = lambda[r] * v[c];
    }
    return eta;
}

}  // namespace

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double unit_deviance(double y, double eta) {
    // log mu = -softplus(-eta), log(1 - mu) = -softplus(eta)
    double d = 0.0;
    if (y > 0.0) d += y * (std::log(y) + softplus(-eta));
    if (y < 1.0) d += (1.0 - y) * (std::log1p(-y) + softplus(eta));
    return 2.0 * std::max(d, 0.0);
}

double deviance(const Matrix& observed, const Matrix& eta, const Matrix& weights) {
    if (observed.rows() != eta.rows() || observed.cols() != eta.cols() || weights.rows() != eta.rows() ||
        weights.cols() != eta.cols()) {
        throw DimensionMismatch("deviance: observed, eta and weights must have equal dimensions");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        total += weights.data()[i] * unit_deviance(observed.data()[i], eta.data()[i]);
    }
    return total;
}

double deviance(const PairwiseRates& rates, const Matrix& eta, const Matrix& weights) {
    return deviance(vstack(rates.mtp, rates.mfp), eta, weights);
}

void CostWeights::validate(std::size_t T, std::size_t K) const {
    if (q_tp.rows() != T || q_tp.cols() != K || q_fp.rows() != T || q_fp.cols() != K) {
        throw DimensionMismatch("cost weights must be two " + std::to_string(T) + "x" + std::to_string(K) +
                                " matrices");
    }
    for (const Matrix* m : {&q_tp, &q_fp}) {
        for (std::size_t r = 0; r < m->rows(); ++r) {
            for (std::size_t c = 0; c < m->cols(); ++c) {
                const double q = (*m)(r, c);
                if (!std::isfinite(q) || q <= 0.0) {
                    throw NonPositiveWeight(std::string(m == &q_tp ? "TPR" : "FPR") + " weight at row " +
                                            std::to_string(r) + ", column " + std::to_string(c) + " is " +
                                            format_real(q));
                }
            }
        }
    }
}

CostWeights operator*(const CostWeights& a, const CostWeights& b) {
    if (a.q_tp.rows() != b.q_tp.rows() || a.q_tp.cols() != b.q_tp.cols()) {
        throw DimensionMismatch("cannot combine cost weights of different shapes");
    }
    CostWeights out = a;
    for (std::size_t i = 0; i < out.q_tp.size(); ++i) {
        out.q_tp.data()[i] *= b.q_tp.data()[i];
        out.q_fp.data()[i] *= b.q_fp.data()[i];
    }
    return out;
}

CostWeights scaled(const CostWeights& w, double factor) {
    CostWeights out = w;
    for (auto& x : out.q_tp.data()) x *= factor;
    for (auto& x : out.q_fp.data()) x *= factor;
    return out;
}

CostWeights column_weights(std::size_t T, const std::vector<double>& tp, const std::vector<double>& fp) {
    if (tp.size() != fp.size()) throw DimensionMismatch("TPR and FPR column weights differ in length");
    CostWeights out{Matrix(T, tp.size()), Matrix(T, fp.size())};
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t l = 0; l < tp.size(); ++l) {
            out.q_tp(t, l) = tp[l];
            out.q_fp(t, l) = fp[l];
        }
    }
    return out;
}

CostWeights cardinality_weights(const PairwiseRates& rates, WeightMode mode,
                                const std::optional<CostWeights>& custom) {
    const std::size_t T = rates.T();
    const std::size_t K = rates.K();
    switch (mode) {
        case WeightMode::weighted:
            return CostWeights{Matrix(T, K, 1.0), Matrix(T, K, 1.0)};
        case WeightMode::unweighted: {
            std::vector<double> tp(K), fp(K);
            for (std::size_t l = 0; l < K; ++l) {
                if (rates.n_pos[l] == 0 || rates.n_neg[l] == 0) {
                    throw NonPositiveWeight("pair " + rates.pairs[l].label() + " has no observations");
                }
                tp[l] = 1.0 / static_cast<double>(rates.n_pos[l]);
                fp[l] = 1.0 / static_cast<double>(rates.n_neg[l]);
            }
            return column_weights(T, tp, fp);
        }
        case WeightMode::custom:
            if (!custom) throw InputError("custom weight mode needs a weight matrix");
            custom->validate(T, K);
            return *custom;
    }
    throw InputError("unknown weight mode");
}

void write_weights_csv(std::ostream& out, const CostWeights& w, const std::vector<PairIndex>& pairs) {
    for (std::size_t l = 0; l < pairs.size(); ++l) out << (l ? "," : "") << pairs[l].label();
    out << '\n';
    for (const Matrix* m : {&w.q_tp, &w.q_fp}) {
        for (std::size_t t = 0; t < m->rows(); ++t) {
            for (std::size_t l = 0; l < m->cols(); ++l) out << (l ? "," : "") << format_real((*m)(t, l));
            out << '\n';
        }
    }
}

CostWeights read_weights_csv(std::istream& in) {
    std::string line;
    std::vector<std::vector<double>> rows;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(field, &used));
            } catch (const std::exception&) {
                throw ParseError("weights line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("weights line " + std::to_string(line_no) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.size() % 2 != 0) {
        throw ParseError("weights file must hold 2T rows (TPR block then FPR block)");
    }
    const std::size_t T = rows.size() / 2;
    const std::size_t K = rows.front().size();
    CostWeights w{Matrix(T, K), Matrix(T, K)};
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t l = 0; l < K; ++l) {
            w.q_tp(t, l) = rows[t][l];
            w.q_fp(t, l) = rows[T + t][l];
        }
    }
    w.validate(T, K);
    return w;
}

Matrix StackedProblem::effective_weights() const {
    Matrix w = trials;
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] *= q.data()[i];
    return w;
}

double StackedProblem::max_trials() const {
    double m = 0.0;
    for (double t : trials.data()) m = std::max(m, t);
    return m;
}

StackedProblem stack(const PairwiseRates& rates, const CostWeights& costs) {
    const std::size_t T = rates.T();
    const std::size_t K = rates.K();
    costs.validate(T, K);
    StackedProblem p;
    p.rates = vstack(rates.mtp, rates.mfp);
    p.q = vstack(costs.q_tp, costs.q_fp);
    p.trials = Matrix(2 * T, K);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t l = 0; l < K; ++l) {
            p.trials(t, l) = static_cast<double>(rates.n_pos[l]);
            p.trials(T + t, l) = static_cast<double>(rates.n_neg[l]);
        }
    }
    return p;
}

FactorizationFit fit(const PairwiseRates& rates, const CostWeights& costs, const FitOptions& opts) {
    return fit(stack(rates, costs), opts);
}

FactorizationFit fit(const StackedProblem& problem, const FitOptions& opts) {
    const std::size_t R = problem.rows();
    const std::size_t C = problem.cols();
    if (R == 0 || C == 0) throw DimensionMismatch("cannot factorize an empty matrix");
    if (problem.trials.rows() != R || problem.trials.cols() != C || problem.q.rows() != R ||
        problem.q.cols() != C) {
        throw DimensionMismatch("rates, trials and weights must share dimensions");
    }

    FactorizationFit out;
    out.weights = problem.effective_weights();
    const double max_trials = problem.max_trials();
    out.clamp_eps = opts.clamp_eps.value_or(max_trials > 0.0 ? 0.5 / max_trials : 1e-6);
    if (!(out.clamp_eps > 0.0 && out.clamp_eps < 0.5)) {
        throw InputError("clamp_eps must lie in (0, 0.5), got " + format_real(out.clamp_eps));
    }

    Matrix y(R, C);
    Matrix eta0(R, C);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y.data()[i] = clamp_rate(problem.rates.data()[i], out.clamp_eps);
        eta0.data()[i] = logit(y.data()[i]);
    }

    std::vector<double>& lambda = out.lambda;
    std::vector<double>& v = out.v;
    rank1_start(eta0, opts.power_iterations, opts.power_tol, lambda, v);

    const Matrix& w = out.weights;
    double dev = deviance(y, outer(lambda, v), w);
    out.deviance_trace.push_back(dev);
    const bool parallel = R * C >= kParallelCells;

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const std::vector<double> prev_lambda = lambda;
        const std::vector<double> prev_v = v;
        bool degenerate = false;

#pragma omp parallel for if (parallel) reduction(|| : degenerate)
        for (std::size_t r = 0; r < R; ++r) {
            bool bad = false;
            lambda[r] = scoring_step(
                lambda[r], C, [&](std::size_t c) { return Triple{y(r, c), w(r, c), v[c]}; }, opts.max_halvings,
                bad);
            degenerate = degenerate || bad;
        }
        if (degenerate) {
            throw NumericalDegeneracy("row scoring denominator underflowed at iteration " + std::to_string(iter));
        }

#pragma omp parallel for if (parallel) reduction(|| : degenerate)
        for (std::size_t c = 0; c < C; ++c) {
            bool bad = false;
            v[c] = scoring_step(
                v[c], R, [&](std::size_t r) { return Triple{y(r, c), w(r, c), lambda[r]}; }, opts.max_halvings,
                bad);
            degenerate = degenerate || bad;
        }
        if (degenerate) {
            throw NumericalDegeneracy("column scoring denominator underflowed at iteration " +
                                      std::to_string(iter));
        }

        out.iterations = iter;
        const double next = deviance(y, outer(lambda, v), w);
        if (next > dev) {
            // Only rounding can get here; the previous iterate is as good as it gets.
            lambda = prev_lambda;
            v = prev_v;
            out.converged = true;
            break;
        }
        out.deviance_trace.push_back(next);
        const bool done = (dev - next) / (next + 0.1) < opts.tol;
        dev = next;
        if (done) {
            out.converged = true;
            break;
        }
    }

    normalize(lambda, v);
    out.eta = outer(lambda, v);
    return out;
}

const FactorizationFit& require_converged(const FactorizationFit& f) {
    if (!f.converged) {
        throw NoConvergence("factorization did not converge within " + std::to_string(f.iterations) +
                            " iterations (final deviance " + format_real(f.final_deviance()) + ")");
    }
    return f;
}

CenteredComponents center(const Matrix& eta) {
    const std::size_t R = eta.rows();
    const std::size_t C = eta.cols();
    if (R % 2 != 0) throw DimensionMismatch("stacked predictor must have an even number of rows");
    CenteredComponents out;
    out.residual = eta;
    std::vector<double> means(R);
    for (std::size_t r = 0; r < R; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += eta(r, c);
        means[r] = s / static_cast<double>(C);
        for (std::size_t c = 0; c < C; ++c) out.residual(r, c) -= means[r];
    }
    const std::size_t T = R / 2;
    out.lambda0_tp.assign(means.begin(), means.begin() + static_cast<std::ptrdiff_t>(T));
    out.lambda0_fp.assign(means.begin() + static_cast<std::ptrdiff_t>(T), means.end());
    return out;
}

CenteredComponents center(const FactorizationFit& f) { return center(f.eta); }

void write_fit_json(std::ostream& out, const FactorizationFit& f, const CenteredComponents& c) {
    nlohmann::json doc;
    doc["lambda"] = f.lambda;
    doc["v"] = f.v;
    doc["lambda0_tp"] = c.lambda0_tp;
    doc["lambda0_fp"] = c.lambda0_fp;
    doc["deviance_trace"] = f.deviance_trace;
    doc["converged"] = f.converged;
    doc["iterations"] = f.iterations;
    doc["clamp_eps"] = f.clamp_eps;
    out << doc.dump(1) << '\n';
}

}  // namespace multiroc
