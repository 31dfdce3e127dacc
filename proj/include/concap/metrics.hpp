#pragma once

#include "concap/backend.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace concap {

// Normalized probability of "Yes".
inline double p_yes(const AlignmentLogits& l) {
    double denom = l.s_yes + l.s_no;
    if (!(denom > 0)) throw DataError("zero-denominator: s_yes + s_no must be positive");
    return l.s_yes / denom;
}

struct ScoredLabel {
    double score = 0;
    int label = 0;  // 1 positive, 0 negative
};

// Mann-Whitney AUC via the rank sum, with average ranks for ties (a tied
// positive/negative pair earns half credit). O(n log n).
inline double roc_auc(std::span<const ScoredLabel> scored) {
    std::size_t n_pos = 0;
    for (const auto& s : scored) {
        if (s.label != 0 && s.label != 1) throw PreconditionError("labels must be 0 or 1");
        if (std::isnan(s.score)) throw PreconditionError("score is NaN");
        n_pos += static_cast<std::size_t>(s.label);
    }
    std::size_t n_neg = scored.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DegenerateLabelsError("need at least one positive and one negative");

    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scored[a].score < scored[b].score; });

    double pos_rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scored[order[j]].score == scored[order[i]].score) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k)
            if (scored[order[k]].label == 1) pos_rank_sum += avg_rank;
        i = j;
    }
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1) / 2) / (np * nn);
}

enum class PerTypePositives {
    paired,  // positives whose tuple produced a negative of that type
    all,     // every positive
};

// AUC per misalignment type. Degenerate types are left out of the map.
// `scores` is parallel to `examples`.
inline std::map<MisalignmentType, double> roc_auc_by_misalignment(std::span<const EntailmentExample> examples,
                                                                  std::span<const double> scores,
                                                                  PerTypePositives policy = PerTypePositives::paired) {
    if (examples.size() != scores.size()) throw PreconditionError("examples and scores differ in length");
    std::map<MisalignmentType, std::unordered_set<std::string>> ids_by_type;
    for (const auto& e : examples) {
        if (e.label == 0) {
            if (!e.misalignment) throw PreconditionError("negative example " + e.instance_id + " has no misalignment");
            ids_by_type[*e.misalignment].insert(e.instance_id);
        }
    }
    std::map<MisalignmentType, double> out;
    for (const auto& [m, ids] : ids_by_type) {
        std::vector<ScoredLabel> subset;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            const auto& e = examples[i];
            bool in = e.label == 0 ? e.misalignment == m
                                   : (policy == PerTypePositives::all || ids.contains(e.instance_id));
            if (in) subset.push_back({scores[i], e.label});
        }
        try {
            out[m] = roc_auc(subset);
        } catch (const DegenerateLabelsError&) {
        }
    }
    return out;
}

// Mean over relevant items of precision at each one's rank.
inline double average_precision(std::span<const std::string> ranking, const std::set<std::string>& relevant) {
    if (relevant.empty()) throw DataError("empty-relevant: no relevant candidates");
    std::set<std::string> seen;
    double sum = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (!seen.insert(ranking[i]).second) throw PreconditionError("duplicate candidate " + ranking[i]);
        if (relevant.contains(ranking[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    if (hits != relevant.size()) throw PreconditionError("relevant set is not a subset of the ranking");
    return sum / static_cast<double>(relevant.size());
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace concap
