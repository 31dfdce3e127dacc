#pragma once

// Temporal-difficulty scoring, hard-caption selection, the Human-Hard filter,
// and misalignment-type assignment.

#include "concap/backend.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace concap {

// A(V, T): the best single-frame entailment score. Low values mean no single
// frame explains the caption.
inline double video_text_alignment_score(std::span<const double> frame_scores) {
    if (frame_scores.empty()) throw DataError("empty-list: no frame scores");
    for (double s : frame_scores)
        if (!is_unit(s)) throw PreconditionError("frame score " + std::to_string(s) + " outside [0, 1]");
    return *std::max_element(frame_scores.begin(), frame_scores.end());
}

// Indices of the k lowest-scored items; ties go to the smaller normalized
// text, then the earlier position. Returned in ascending position order.
inline std::vector<std::size_t> lowest_k(std::span<const double> scores, std::span<const std::string> texts,
                                         std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::string> norm(texts.size());
    std::transform(texts.begin(), texts.end(), norm.begin(), [](const auto& t) { return normalize_text(t); });
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return norm[a] < norm[b];
    });
    order.resize(std::min(k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

// Keeps the k hardest captions of every video. Videos keep first-appearance
// order and captions keep corpus order.
inline std::vector<CaptionInstance> select_hard_captions(const std::vector<CaptionInstance>& corpus, std::size_t k = 5) {
    if (k < 1) throw PreconditionError("k must be positive");
    std::map<std::string, std::vector<std::size_t>> by_video;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!corpus[i].a_vle) throw DataError("missing-score: caption " + std::to_string(i) + " has no a_vle");
        by_video[corpus[i].video.video_id].push_back(i);
    }
    std::vector<bool> keep(corpus.size(), false);
    for (const auto& [_, members] : by_video) {
        std::vector<double> scores;
        std::vector<std::string> texts;
        for (auto i : members) {
            scores.push_back(*corpus[i].a_vle);
            texts.push_back(corpus[i].caption);
        }
        for (auto j : lowest_k(scores, texts, k)) keep[members[j]] = true;
    }
    std::vector<CaptionInstance> out;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (keep[i]) out.push_back(corpus[i]);
    return out;
}

// Fraction of captions whose score falls strictly below the threshold.
inline double temporal_challenge_stats(std::span<const double> scores, double threshold = 0.5) {
    if (scores.empty()) throw DataError("empty corpus");
    auto hard = std::count_if(scores.begin(), scores.end(), [&](double s) { return s < threshold; });
    return static_cast<double>(hard) / static_cast<double>(scores.size());
}

enum class HumanHardDirection {
    keep_below,     // retain a_vle < threshold: no single frame suffices
    keep_at_or_above,
};

template <typename T>
struct FilterResult {
    std::vector<T> retained;
    std::size_t discarded = 0;
};

template <typename T, typename ScoreFn>
FilterResult<T> filter_human_hard(std::span<const T> records, ScoreFn score_of, double threshold = 0.5,
                                  HumanHardDirection direction = HumanHardDirection::keep_below) {
    FilterResult<T> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::optional<double> s = score_of(records[i]);
        if (!s) throw DataError("missing-score: record " + std::to_string(i) + " has no a_vle");
        bool below = *s < threshold;
        if (below == (direction == HumanHardDirection::keep_below))
            out.retained.push_back(records[i]);
        else
            ++out.discarded;
    }
    return out;
}

inline FilterResult<CaptionInstance> filter_human_hard(std::span<const CaptionInstance> records, double threshold = 0.5,
                                                       HumanHardDirection direction = HumanHardDirection::keep_below) {
    return filter_human_hard<CaptionInstance>(records, [](const CaptionInstance& c) { return c.a_vle; }, threshold,
                                              direction);
}

// ---------------------------------------------------------------------------
// Misalignment assignment

enum class EventGatePolicy {
    multiple_only,    // challenging captions become event-order only when they describe several events
    all_challenging,  // every challenging caption becomes event-order
};

struct AssignmentContext {
    VideoSource source = VideoSource::external;
    bool challenge_flag = false;
    std::optional<EventClass> event_class;  // consulted only when challenge_flag is set
    PosTags pos_tags;
    std::uint64_t rng_seed = 0;
    EventGatePolicy event_gate = EventGatePolicy::multiple_only;
};

// Spatial-relation cues. Multi-word phrases come first so the reported match
// is the longest one.
inline constexpr std::array<std::string_view, 17> kRelationKeywords = {
    "in front of", "top of", "left of", "right of", "far away", "above",  "below",    "behind",    "under",
    "inside",      "outside", "beneath", "upwards", "downwards", "up",    "down",     "towards",
};

inline constexpr std::array<std::string_view, 10> kCountWords = {"one", "two",   "three", "four", "five",
                                                                 "six", "seven", "eight", "nine", "ten"};

inline std::optional<std::string> find_relation_keyword(std::string_view caption) {
    auto words = word_tokens(caption);
    for (auto phrase : kRelationKeywords) {
        std::vector<std::string> parts;
        for (auto& w : word_tokens(phrase)) parts.push_back(w);
        for (std::size_t i = 0; i + parts.size() <= words.size(); ++i)
            if (std::equal(parts.begin(), parts.end(), words.begin() + static_cast<std::ptrdiff_t>(i)))
                return std::string(phrase);
    }
    return std::nullopt;
}

// A spelled number one..ten or an all-digit token.
inline std::optional<std::string> find_count_word(std::string_view caption) {
    for (const auto& w : word_tokens(caption)) {
        if (std::find(kCountWords.begin(), kCountWords.end(), w) != kCountWords.end()) return w;
        if (std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) return w;
    }
    return std::nullopt;
}

// Per-caption stream seed, independent of processing order.
inline std::uint64_t caption_seed(std::uint64_t global_seed, std::string_view video_id, std::string_view caption) {
    return hash64(join_key(std::to_string(global_seed), video_id, normalize_text(caption)));
}

inline std::uint64_t assignment_draw(std::uint64_t rng_seed, std::string_view caption) {
    return hash64(join_key(std::to_string(rng_seed), normalize_text(caption)));
}

// Removes types whose required part of speech is absent.
inline std::vector<MisalignmentType> pos_eligible(std::vector<MisalignmentType> pool, const PosTags& tags) {
    std::erase_if(pool, [&](MisalignmentType m) {
        return (m == MisalignmentType::attribute && !tags.contains(PosTag::ADJ)) ||
               (m == MisalignmentType::action && !tags.contains(PosTag::VERB)) ||
               (m == MisalignmentType::object && !tags.contains(PosTag::NOUN));
    });
    return pool;
}

inline MisalignmentType assign_misalignment(std::string_view caption, const AssignmentContext& ctx) {
    if (normalize_text(caption).empty()) throw PreconditionError("caption is empty");
    if (find_relation_keyword(caption)) return MisalignmentType::relation;
    if (find_count_word(caption)) return MisalignmentType::count;

    std::vector<MisalignmentType> pool;
    if (ctx.source == VideoSource::tempo) {
        pool = {MisalignmentType::object, MisalignmentType::action, MisalignmentType::attribute,
                MisalignmentType::hallucination, MisalignmentType::event_order};
    } else {
        if (ctx.challenge_flag) {
            if (ctx.event_gate == EventGatePolicy::all_challenging) return MisalignmentType::event_order;
            if (!ctx.event_class) throw PreconditionError("challenging caption needs an event class");
            if (*ctx.event_class == EventClass::multiple) return MisalignmentType::event_order;
        }
        pool = {MisalignmentType::object, MisalignmentType::action, MisalignmentType::attribute,
                MisalignmentType::hallucination};
    }
    auto eligible = pos_eligible(std::move(pool), ctx.pos_tags);
    if (eligible.empty()) throw DataError("no-eligible-type: every candidate type is excluded by POS constraints");
    return eligible[scale_draw(assignment_draw(ctx.rng_seed, caption), eligible.size())];
}

}  // namespace concap
