#include "multiroc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "multiroc/errors.hpp"
#include "multiroc/parallel.hpp"
#include "multiroc/rng.hpp"

namespace multiroc {

namespace {

// Stream ids under a simulation seed.
enum Stream : std::uint64_t {
    kCovariates = 1,
    kCoefficients = 2,
    kLabels = 3,
    kNoise = 4,
    kBalance = 5,
};

constexpr int kMaxSkewAttempts = 100;

Matrix normal_matrix(std::size_t rows, std::size_t cols, double mean, Rng& rng) {
    std::normal_distribution<double> dist(mean, 1.0);
    Matrix m(rows, cols);
    for (auto& x : m.data()) x = dist(rng);
    return m;
}

// In-place softmax of one row of logits.
void softmax(std::span<double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - mx);
        sum += z;
    }
    for (auto& z : logits) z /= sum;
}

// First m entries of a uniformly shuffled copy of `pool`.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t m, Rng& rng) {
    m = std::min(m, pool.size());
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(m);
    return pool;
}

std::vector<std::vector<std::size_t>> class_pools(const ScoredDataset& dataset) {
    std::vector<std::vector<std::size_t>> pools(dataset.k());
    for (std::size_t r = 0; r < dataset.n(); ++r) pools[static_cast<std::size_t>(dataset.label(r))].push_back(r);
    return pools;
}

// Logits of the multinomial model for one observation; class 0 is the reference.
void model_logits(const MultinomialModel& model, std::span<const double> x, std::span<double> out) {
    const std::size_t d = model.d();
    out[0] = 0.0;
    for (std::size_t c = 1; c < model.k; ++c) {
        double z = model.coef(0, c - 1);
        for (std::size_t j = 0; j < d; ++j) z += x[j] * model.coef(j + 1, c - 1);
        out[c] = z;
    }
}

double mean_log_likelihood(const MultinomialModel& model, const Matrix& X, const std::vector<int>& labels) {
    std::vector<double> z(model.k);
    double ll = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        model_logits(model, X.row(i), z);
        const double mx = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - mx);
        ll += z[static_cast<std::size_t>(labels[i])] - mx - std::log(s);
    }
    return ll / static_cast<double>(X.rows());
}

// Mean log-likelihood gradient with respect to coef.
Matrix gradient(const MultinomialModel& model, const Matrix& X, const std::vector<int>& labels) {
    const std::size_t d = model.d();
    Matrix g(d + 1, model.k - 1);
    std::vector<double> p(model.k);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        model_logits(model, X.row(i), p);
        softmax(p);
        const auto x = X.row(i);
        for (std::size_t c = 1; c < model.k; ++c) {
            const double resid = (static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0) - p[c];
            g(0, c - 1) += resid;
            for (std::size_t j = 0; j < d; ++j) g(j + 1, c - 1) += resid * x[j];
        }
    }
    for (auto& v : g.data()) v /= static_cast<double>(X.rows());
    return g;
}

}  // namespace

void SimulationConfig::validate() const {
    if (k < 2) throw InvalidK("simulation needs k >= 2, got " + std::to_string(k));
    if (p < 1) throw InputError("simulation needs p >= 1");
    if (d < 1 || d > p) throw InputError("available covariates d must lie in [1, p]");
    if (n < k) throw InputError("simulation needs at least k observations");
}

SimulatedData generate_multinomial(const SimulationConfig& config) {
    config.validate();
    const std::size_t n = config.n, p = config.p, k = config.k;

    auto rng_x = make_rng(config.seed, kCovariates);
    auto rng_b = make_rng(config.seed, kCoefficients);
    auto rng_y = make_rng(config.seed, kLabels);
    Matrix X = normal_matrix(n, p, 0.0, rng_x);
    Matrix B = normal_matrix(p, k - 1, 1.0, rng_b);

    Matrix probs(n, k);
    std::vector<int> labels(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = probs.row(i);
        row[0] = 1.0;
        for (std::size_t c = 1; c < k; ++c) {
            double z = 0.0;
            for (std::size_t j = 0; j < p; ++j) z += X(i, j) * B(j, c - 1);
            row[c] = z;
        }
        softmax(row);
        if (config.label_mode == LabelMode::deterministic) {
            labels[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        } else {
            const double u = unif(rng_y);
            double acc = 0.0;
            std::size_t c = 0;
            for (; c + 1 < k; ++c) {
                acc += row[c];
                if (u < acc) break;
            }
            labels[i] = static_cast<int>(c);
        }
    }
    return {ScoredDataset(std::move(probs), std::move(labels)), std::move(X), std::move(B)};
}

Matrix noise_covariates(std::size_t n, std::size_t p, std::uint64_t seed) {
    auto rng = make_rng(seed, kNoise);
    return normal_matrix(n, p, 0.0, rng);
}

MultinomialModel fit_multinomial_model(const Matrix& X, std::size_t d, const std::vector<int>& labels,
                                       std::size_t k, const MultinomialOptions& opts) {
    if (k < 2) throw InvalidK("multinomial regression needs k >= 2");
    if (d < 1 || d > X.cols()) throw InputError("d must lie in [1, number of covariates]");
    if (labels.size() != X.rows()) throw DimensionMismatch("one label per covariate row required");
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= k) throw LabelOutOfRange("label " + std::to_string(y));
    }

    MultinomialModel model;
    model.k = k;
    model.coef = Matrix(d + 1, k - 1);

    double f = mean_log_likelihood(model, X, labels);
    double step = 1.0;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const Matrix g = gradient(model, X, labels);
        double g2 = 0.0;
        for (double v : g.data()) g2 += v * v;
        if (g2 == 0.0) {
            model.converged = true;
            break;
        }

        MultinomialModel candidate = model;
        double f_new = f;
        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                candidate.coef.data()[i] = model.coef.data()[i] + step * g.data()[i];
            }
            f_new = mean_log_likelihood(candidate, X, labels);
            if (f_new >= f + 1e-4 * step * g2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        model.iterations = iter;
        if (!accepted) {
            model.converged = true;
            break;
        }
        model.coef = std::move(candidate.coef);
        const double change = std::abs(f_new - f) / std::max(std::abs(f), 1e-300);
        f = f_new;
        step *= 2.0;
        if (change < opts.tol) {
            model.converged = true;
            break;
        }
    }
    model.log_likelihood = f * static_cast<double>(X.rows());

    std::vector<double> probs(k);
    for (std::size_t i = 0; i < X.rows() && !model.separation_warning; ++i) {
        model_logits(model, X.row(i), probs);
        softmax(probs);
        for (double q : probs) {
            if (q > 1.0 - 1e-12) model.separation_warning = true;
        }
    }
    return model;
}

Matrix predict_probabilities(const MultinomialModel& model, const Matrix& X) {
    if (X.cols() < model.d()) throw DimensionMismatch("covariates have fewer columns than the model uses");
    Matrix probs(X.rows(), model.k);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto row = probs.row(i);
        model_logits(model, X.row(i), row);
        softmax(row);
    }
    return probs;
}

ScoredDataset fit_multinomial(const Matrix& X, std::size_t d, const std::vector<int>& labels, std::size_t k,
                              const MultinomialOptions& opts) {
    auto model = fit_multinomial_model(X, d, labels, k, opts);
    return ScoredDataset(predict_probabilities(model, X), labels);
}

double skew_statistic(const std::vector<double>& w) {
    if (w.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    return *hi / *lo;
}

std::vector<double> dirichlet_draw(std::size_t k, double alpha, std::uint64_t seed, std::size_t stream) {
    if (!(alpha > 0.0)) throw InputError("Dirichlet concentration must be positive");
    auto rng = make_rng(seed, stream);
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> w(k);
    double sum = 0.0;
    for (auto& x : w) {
        x = gamma(rng);
        sum += x;
    }
    for (auto& x : w) x /= sum;
    return w;
}

SkewSample dirichlet_skew(const ScoredDataset& dataset, double alpha, std::uint64_t seed,
                          std::optional<std::size_t> n_target) {
    const std::size_t k = dataset.k();
    const std::size_t target = n_target.value_or(dataset.n());
    const auto pools = class_pools(dataset);

    for (int attempt = 0; attempt < kMaxSkewAttempts; ++attempt) {
        auto w = dirichlet_draw(k, alpha, seed, 2 * static_cast<std::size_t>(attempt));
        std::vector<std::size_t> take(k);
        bool empty = false;
        for (std::size_t c = 0; c < k; ++c) {
            const auto want = static_cast<std::size_t>(std::llround(w[c] * static_cast<double>(target)));
            take[c] = std::min(want, pools[c].size());
            empty = empty || take[c] == 0;
        }
        if (empty) continue;

        auto rng = make_rng(seed, 2 * static_cast<std::size_t>(attempt) + 1);
        std::vector<std::size_t> rows;
        for (std::size_t c = 0; c < k; ++c) {
            auto picked = sample_without_replacement(pools[c], take[c], rng);
            rows.insert(rows.end(), picked.begin(), picked.end());
        }
        std::sort(rows.begin(), rows.end());
        SkewSample out{subset(dataset, rows), w, rows, {}, skew_statistic(w)};
        out.counts = class_counts(out.dataset);
        return out;
    }
    throw EmptyClassAfterSampling("every Dirichlet draw in " + std::to_string(kMaxSkewAttempts) +
                                  " attempts left some class empty");
}

std::vector<std::size_t> balanced_rows(const ScoredDataset& dataset, std::uint64_t seed,
                                       std::optional<std::size_t> n_sub) {
    const auto pools = class_pools(dataset);
    std::size_t smallest = dataset.n();
    for (const auto& pool : pools) smallest = std::min(smallest, pool.size());
    const std::size_t m = n_sub.value_or(smallest);
    if (m == 0) throw EmptyClassAfterSampling("balanced subsample of size 0");
    auto rng = make_rng(seed, kBalance);
    std::vector<std::size_t> rows;
    for (const auto& pool : pools) {
        auto picked = sample_without_replacement(pool, m, rng);
        rows.insert(rows.end(), picked.begin(), picked.end());
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

ScoredDataset balanced_subsample(const ScoredDataset& dataset, std::uint64_t seed,
                                 std::optional<std::size_t> n_sub) {
    return subset(dataset, balanced_rows(dataset, seed, n_sub));
}

ScoredDataset majority_classifier(const ScoredDataset& dataset, std::size_t majority_class, double margin) {
    const std::size_t k = dataset.k();
    if (majority_class >= k) throw LabelOutOfRange("majority class " + std::to_string(majority_class));
    if (!(margin > 0.0 && margin <= 0.5)) throw InputError("majority margin must lie in (0, 0.5]");
    const double top = 0.5 + margin;
    const double rest = (1.0 - top) / static_cast<double>(k - 1);
    Matrix probs(dataset.n(), k, rest);
    for (std::size_t r = 0; r < dataset.n(); ++r) probs(r, majority_class) = top;
    return ScoredDataset(std::move(probs), dataset.labels());
}

CostWeights cost_schedule(std::size_t T, std::size_t k, std::size_t majority_class, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw NonPositiveWeight("cost multiplier must be positive");
    if (majority_class >= k) throw LabelOutOfRange("majority class " + std::to_string(majority_class));
    const auto pairs = enumerate_pairs(k);
    std::vector<double> tp(pairs.size(), 1.0), fp(pairs.size(), 1.0);
    for (const auto& pr : pairs) {
        if (pr.pos == majority_class) {
            tp[pr.flat] = c;
            fp[pr.flat] = 1.0 / c;
        } else if (pr.neg == majority_class) {
            tp[pr.flat] = 1.0 / c;
            fp[pr.flat] = c;
        }
    }
    return column_weights(T, tp, fp);
}

std::size_t largest_class(const ClassCounts& counts) {
    return static_cast<std::size_t>(std::max_element(counts.counts.begin(), counts.counts.end()) -
                                    counts.counts.begin());
}

namespace {

bool trace_monotone(const FactorizationFit& f) {
    for (std::size_t i = 1; i < f.deviance_trace.size(); ++i) {
        if (f.deviance_trace[i] > f.deviance_trace[i - 1] + 1e-10) return false;
    }
    return true;
}

CurveRecord evaluate_record(const ScoredDataset& data, std::string name, double parameter, std::size_t T) {
    EvaluateOptions uw;
    uw.thresholds = T;
    uw.mode = WeightMode::unweighted;
    const auto ev = evaluate(data, uw);

    CurveRecord rec;
    rec.name = std::move(name);
    rec.parameter = parameter;
    rec.d = ev.d;
    rec.curve = ev.curve;
    rec.converged = ev.fit.converged;
    rec.monotone = trace_monotone(ev.fit);

    const auto wcost = cardinality_weights(ev.rates, WeightMode::weighted);
    const auto wfit = fit(ev.rates, wcost);
    rec.d_weighted = d_statistic(curve(center(wfit), ev.rates.quantile_levels)).value;
    rec.converged = rec.converged && wfit.converged;
    rec.monotone = rec.monotone && trace_monotone(wfit);
    return rec;
}

}  // namespace

DiscriminativeResult discriminative_experiment(const SimulationConfig& config, const std::vector<std::size_t>& ds,
                                               std::size_t T) {
    DiscriminativeResult out{generate_multinomial(config), {}, {}};
    const auto& labels = out.data.truth.labels();
    for (std::size_t d : ds) {
        if (d < 1 || d > config.p) throw InputError("d = " + std::to_string(d) + " outside [1, p]");
        auto scored = fit_multinomial(out.data.covariates, d, labels, config.k);
        out.records.push_back(evaluate_record(scored, "d=" + std::to_string(d), static_cast<double>(d), T));
        out.scored.push_back(std::move(scored));
    }
    const Matrix noise = noise_covariates(config.n, config.p, config.seed);
    auto scored = fit_multinomial(noise, config.p, labels, config.k);
    out.records.push_back(evaluate_record(scored, "noise", 0.0, T));
    out.scored.push_back(std::move(scored));
    return out;
}

std::vector<CurveRecord> skewness_experiment(const SimulationConfig& config, const SkewnessOptions& opts) {
    const auto data = generate_multinomial(config);
    const auto& labels = data.truth.labels();
    const auto rows = balanced_rows(data.truth, config.seed, opts.n_sub);

    std::vector<CurveRecord> out;
    for (std::size_t d : opts.ds) {
        const auto base = subset(fit_multinomial(data.covariates, d, labels, config.k), rows);
        for (std::size_t a = 0; a < opts.alphas.size(); ++a) {
            const double alpha = opts.alphas[a];
            std::vector<CurveRecord> cell(opts.replicates);
            LoopErrors errors(opts.replicates);
            const auto R = static_cast<std::ptrdiff_t>(opts.replicates);
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t rep = 0; rep < R; ++rep) errors.run(static_cast<std::size_t>(rep), [&] {
                const auto seed = derive_seed(config.seed, 1000 * (a + 1) + static_cast<std::uint64_t>(rep));
                const auto skew = dirichlet_skew(base, alpha, seed);
                auto rec = evaluate_record(skew.dataset, "d=" + std::to_string(d), static_cast<double>(d),
                                           opts.thresholds);
                rec.z = skew.z;
                rec.replicate = static_cast<std::size_t>(rep);
                rec.name += ",alpha=" + format_real(alpha);
                cell[static_cast<std::size_t>(rep)] = std::move(rec);
            });
            errors.rethrow();
            out.insert(out.end(), std::make_move_iterator(cell.begin()), std::make_move_iterator(cell.end()));
        }
    }
    return out;
}

std::vector<double> default_cost_grid() {
    std::vector<double> cs;
    for (int i = 1; i <= 9; ++i) cs.push_back(i / 10.0);
    cs.push_back(1.0);
    for (int i = 9; i >= 1; --i) cs.push_back(1.0 / (i / 10.0));
    return cs;
}

std::vector<CurveRecord> weights_experiment(const SimulationConfig& config, const WeightsOptions& opts) {
    const auto data = generate_multinomial(config);
    const auto majority = largest_class(class_counts(data.truth));
    const auto scored = majority_classifier(data.truth, majority);
    const auto rates = rate_matrices(scored, opts.thresholds);
    const auto unweighted = cardinality_weights(rates, WeightMode::unweighted);
    const auto weighted = cardinality_weights(rates, WeightMode::weighted);
    const auto cs = opts.cs.empty() ? default_cost_grid() : opts.cs;

    std::vector<CurveRecord> out(cs.size());
    LoopErrors errors(cs.size());
    const auto C = static_cast<std::ptrdiff_t>(cs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < C; ++i) errors.run(static_cast<std::size_t>(i), [&] {
        const double c = cs[static_cast<std::size_t>(i)];
        const auto schedule = cost_schedule(rates.T(), config.k, majority, c);
        const auto f = fit(rates, unweighted * schedule);
        const auto fw = fit(rates, weighted * schedule);
        CurveRecord rec;
        rec.name = "c=" + format_real(c);
        rec.parameter = c;
        rec.curve = curve(center(f), rates.quantile_levels);
        rec.d = d_statistic(rec.curve).value;
        rec.d_weighted = d_statistic(curve(center(fw), rates.quantile_levels)).value;
        rec.converged = f.converged && fw.converged;
        rec.monotone = trace_monotone(f) && trace_monotone(fw);
        out[static_cast<std::size_t>(i)] = std::move(rec);
    });
    errors.rethrow();
    return out;
}

}  // namespace multiroc
