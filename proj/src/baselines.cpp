#include "multiroc/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "multiroc/errors.hpp"

namespace multiroc {

double mann_whitney_auc(std::vector<double> positive, std::vector<double> negative) {
    if (positive.empty() || negative.empty()) throw EmptyClass("Mann-Whitney AUC needs two non-empty samples");
    const std::size_t n0 = positive.size();
    const std::size_t n1 = negative.size();

    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(n0 + n1);
    for (double s : positive) all.push_back({s, true});
    for (double s : negative) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Rank sums are kept doubled so that midranks stay integral.
    unsigned long long rank_sum_x2 = 0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const unsigned long long midrank_x2 = i + 1 + j;  // (i+1) + j, ranks i+1..j
        for (std::size_t m = i; m < j; ++m) {
            if (all[m].positive) rank_sum_x2 += midrank_x2;
        }
        i = j;
    }
    const unsigned long long min_x2 = static_cast<unsigned long long>(n0) * (n0 + 1);
    const unsigned long long u_x2 = rank_sum_x2 - min_x2;
    return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n0) * static_cast<double>(n1));
}

PairAuc mann_whitney_auc(const ScoredDataset& dataset, const PairIndex& pair) {
    if (pair.pos >= dataset.k() || pair.neg >= dataset.k() || pair.pos == pair.neg) {
        throw InvalidK("pair " + pair.label() + " is not valid for k = " + std::to_string(dataset.k()));
    }
    std::vector<double> pos, neg;
    for (std::size_t r = 0; r < dataset.n(); ++r) {
        const auto y = static_cast<std::size_t>(dataset.label(r));
        if (y == pair.pos) pos.push_back(dataset.prob(r, pair.pos));
        else if (y == pair.neg) neg.push_back(dataset.prob(r, pair.pos));
    }
    if (pos.empty()) throw EmptyClass("class " + std::to_string(pair.pos) + " has no observations");
    if (neg.empty()) throw EmptyClass("class " + std::to_string(pair.neg) + " has no observations");
    return {pair, mann_whitney_auc(std::move(pos), std::move(neg))};
}

std::vector<PairAuc> all_pair_aucs(const ScoredDataset& dataset) {
    const auto pairs = enumerate_pairs(dataset.k());
    std::vector<PairAuc> out(pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t l = 0; l < pairs.size(); ++l) out[l] = mann_whitney_auc(dataset, pairs[l]);
    return out;
}

double hand_till_m(const ScoredDataset& dataset, bool symmetrized) {
    const auto aucs = all_pair_aucs(dataset);
    const std::size_t k = dataset.k();
    if (!symmetrized) {
        double s = 0.0;
        for (const auto& a : aucs) s += a.value;
        return s / static_cast<double>(aucs.size());
    }
    // Flat index of (i,j) is i*(k-1) + (j < i ? j : j-1).
    auto flat = [k](std::size_t i, std::size_t j) { return i * (k - 1) + (j < i ? j : j - 1); };
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) s += 0.5 * (aucs[flat(i, j)].value + aucs[flat(j, i)].value);
    }
    return 2.0 * s / static_cast<double>(k * (k - 1));
}

}  // namespace multiroc
