#include "multiroc/pairwise_rates.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "multiroc/errors.hpp"

namespace multiroc {

namespace {

void check_levels(std::span<const double> levels) {
    for (std::size_t t = 0; t < levels.size(); ++t) {
        if (!(levels[t] >= 0.0 && levels[t] <= 1.0)) {
            throw InputError("quantile level " + format_real(levels[t]) + " outside [0, 1]");
        }
        if (t > 0 && !(levels[t] < levels[t - 1])) {
            throw InputError("quantile levels must be strictly decreasing");
        }
    }
}

// Quantile of already sorted data, linear interpolation between order statistics.
double sorted_quantile(std::span<const double> sorted, double level) {
    const double h = static_cast<double>(sorted.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Number of sorted values strictly greater than t.
std::size_t count_above(const std::vector<double>& sorted, double t) {
    return static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
}

}  // namespace

std::string PairIndex::label() const { return std::to_string(pos) + ">" + std::to_string(neg); }

std::size_t pair_count(std::size_t k) { return k * (k - 1); }

std::vector<PairIndex> enumerate_pairs(std::size_t k) {
    if (k < 2) throw InvalidK("need at least 2 classes to form pairs, got " + std::to_string(k));
    std::vector<PairIndex> pairs;
    pairs.reserve(pair_count(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i != j) pairs.push_back({i, j, pairs.size()});
        }
    }
    return pairs;
}

std::vector<double> default_levels(std::size_t T) {
    if (T < 2) throw InputError("need at least 2 thresholds, got " + std::to_string(T));
    std::vector<double> levels(T);
    for (std::size_t t = 0; t < T; ++t) {
        levels[t] = 1.0 - static_cast<double>(t) / static_cast<double>(T - 1);
    }
    levels.back() = 0.0;
    return levels;
}

std::vector<double> threshold_grid(std::span<const double> scores, std::span<const double> levels) {
    if (scores.empty()) throw EmptyScores("cannot take quantiles of an empty score set");
    check_levels(levels);
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(levels.size());
    for (std::size_t t = 0; t < levels.size(); ++t) out[t] = sorted_quantile(sorted, levels[t]);
    return out;
}

PairwiseRates rate_matrices(const ScoredDataset& dataset, std::span<const double> levels) {
    if (levels.size() < 2) throw InputError("need at least 2 quantile levels");
    check_levels(levels);

    const std::size_t k = dataset.k();
    const std::size_t T = levels.size();
    const auto pairs = enumerate_pairs(k);
    const std::size_t K = pairs.size();

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t r = 0; r < dataset.n(); ++r) members[static_cast<std::size_t>(dataset.label(r))].push_back(r);
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) throw EmptyClass("class " + std::to_string(c) + " has no observations");
    }

    PairwiseRates out;
    out.mtp = Matrix(T, K);
    out.mfp = Matrix(T, K);
    out.thresholds = Matrix(T, K);
    out.n_pos.resize(K);
    out.n_neg.resize(K);
    out.quantile_levels.assign(levels.begin(), levels.end());
    out.pairs = pairs;
    std::vector<char> degenerate(K, 0);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t l = 0; l < K; ++l) {
        const auto [i, j, flat] = pairs[l];
        std::vector<double> pos_scores, neg_scores;
        pos_scores.reserve(members[i].size());
        neg_scores.reserve(members[j].size());
        for (auto r : members[i]) pos_scores.push_back(dataset.prob(r, i));
        for (auto r : members[j]) neg_scores.push_back(dataset.prob(r, i));
        std::sort(pos_scores.begin(), pos_scores.end());
        std::sort(neg_scores.begin(), neg_scores.end());

        std::vector<double> pooled;
        pooled.reserve(pos_scores.size() + neg_scores.size());
        std::merge(pos_scores.begin(), pos_scores.end(), neg_scores.begin(), neg_scores.end(),
                   std::back_inserter(pooled));
        const bool constant = pooled.front() == pooled.back();
        degenerate[l] = constant ? 1 : 0;

        const auto n0 = static_cast<double>(pos_scores.size());
        const auto n1 = static_cast<double>(neg_scores.size());
        for (std::size_t t = 0; t < T; ++t) {
            const double thr = constant ? levels[t] : sorted_quantile(pooled, levels[t]);
            out.thresholds(t, l) = thr;
            out.mtp(t, l) = static_cast<double>(count_above(pos_scores, thr)) / n0;
            out.mfp(t, l) = static_cast<double>(count_above(neg_scores, thr)) / n1;
        }
        out.n_pos[l] = pos_scores.size();
        out.n_neg[l] = neg_scores.size();
    }

    for (std::size_t l = 0; l < K; ++l) {
        if (degenerate[l]) out.degenerate_columns.push_back(l);
    }
    return out;
}

PairwiseRates rate_matrices(const ScoredDataset& dataset, std::size_t T) {
    const auto levels = default_levels(T);
    return rate_matrices(dataset, levels);
}

PairwiseRates PairwiseRates::with_rates(Matrix tp, Matrix fp) const {
    if (tp.rows() != T() || tp.cols() != K() || fp.rows() != T() || fp.cols() != K()) {
        throw DimensionMismatch("replacement rate matrices must be " + std::to_string(T()) + "x" +
                                std::to_string(K()));
    }
    PairwiseRates out = *this;
    out.mtp = std::move(tp);
    out.mfp = std::move(fp);
    return out;
}

PairwiseRates PairwiseRates::select_columns(const std::vector<std::size_t>& columns) const {
    PairwiseRates out;
    const std::size_t T = this->T();
    out.mtp = Matrix(T, columns.size());
    out.mfp = Matrix(T, columns.size());
    out.thresholds = Matrix(T, columns.size());
    out.quantile_levels = quantile_levels;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const std::size_t l = columns.at(c);
        if (l >= K()) throw DimensionMismatch("column " + std::to_string(l) + " out of range");
        for (std::size_t t = 0; t < T; ++t) {
            out.mtp(t, c) = mtp(t, l);
            out.mfp(t, c) = mfp(t, l);
            out.thresholds(t, c) = thresholds(t, l);
        }
        out.n_pos.push_back(n_pos[l]);
        out.n_neg.push_back(n_neg[l]);
        out.pairs.push_back({pairs[l].pos, pairs[l].neg, c});
        if (std::find(degenerate_columns.begin(), degenerate_columns.end(), l) != degenerate_columns.end()) {
            out.degenerate_columns.push_back(c);
        }
    }
    return out;
}

void write_rates_csv(std::ostream& out, const Matrix& rates, const std::vector<PairIndex>& pairs) {
    for (std::size_t l = 0; l < pairs.size(); ++l) out << (l ? "," : "") << pairs[l].label();
    out << '\n';
    for (std::size_t t = 0; t < rates.rows(); ++t) {
        for (std::size_t l = 0; l < rates.cols(); ++l) out << (l ? "," : "") << format_real(rates(t, l));
        out << '\n';
    }
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) return {};
    Matrix m(j.size(), j[0].size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (j[r].size() != m.cols()) throw ParseError("ragged matrix in JSON");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

void write_rates_json(std::ostream& out, const PairwiseRates& rates) {
    nlohmann::json doc;
    std::vector<std::string> labels;
    for (const auto& p : rates.pairs) labels.push_back(p.label());
    doc["pairs"] = labels;
    doc["quantile_levels"] = rates.quantile_levels;
    doc["n_pos"] = rates.n_pos;
    doc["n_neg"] = rates.n_neg;
    doc["mtp"] = matrix_to_json(rates.mtp);
    doc["mfp"] = matrix_to_json(rates.mfp);
    doc["thresholds"] = matrix_to_json(rates.thresholds);
    doc["degenerate_columns"] = rates.degenerate_columns;
    out << doc.dump(1) << '\n';
}

PairwiseRates read_rates_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        PairwiseRates r;
        r.quantile_levels = doc.at("quantile_levels").get<std::vector<double>>();
        r.n_pos = doc.at("n_pos").get<std::vector<std::size_t>>();
        r.n_neg = doc.at("n_neg").get<std::vector<std::size_t>>();
        r.mtp = matrix_from_json(doc.at("mtp"));
        r.mfp = matrix_from_json(doc.at("mfp"));
        r.thresholds = matrix_from_json(doc.at("thresholds"));
        r.degenerate_columns = doc.value("degenerate_columns", std::vector<std::size_t>{});
        std::size_t flat = 0;
        for (const auto& label : doc.at("pairs")) {
            const auto s = label.get<std::string>();
            const auto gt = s.find('>');
            if (gt == std::string::npos) throw ParseError("bad pair label '" + s + "'");
            r.pairs.push_back({std::stoul(s.substr(0, gt)), std::stoul(s.substr(gt + 1)), flat++});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid rates JSON: ") + e.what());
    }
}

}  // namespace multiroc
