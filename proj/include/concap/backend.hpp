#pragma once

// The inference surface every pipeline stage talks to. Implementations:
// MockBackend (seeded pseudo-scores), ScriptedBackend (fixture table),
// HttpBackend (remote model server). Stages reach them through a Gateway.

#include "concap/core.hpp"
#include "concap/lexicon.hpp"

#include <string>
#include <string_view>

namespace concap {

struct GenerationParams {
    double temperature = 0.5;
    int max_output_tokens = 256;
    double top_p = 0.95;
    int top_k = 40;

    bool operator==(const GenerationParams&) const = default;

    void validate() const {
        if (!(temperature >= 0)) throw ConfigError("generation.temperature must be >= 0");
        if (max_output_tokens < 1) throw ConfigError("generation.max_output_tokens must be positive");
        if (!(top_p > 0 && top_p <= 1)) throw ConfigError("generation.top_p must lie in (0, 1]");
        if (top_k < 1) throw ConfigError("generation.top_k must be positive");
    }
};

// Unnormalized probabilities of answering "Yes" / "No" to the entailment instruction.
struct AlignmentLogits {
    double s_yes = 0;
    double s_no = 0;
};

enum class EventClass { single, multiple };

inline std::string_view to_string(EventClass e) { return e == EventClass::single ? "single" : "multiple"; }

inline EventClass parse_event_class(std::string_view s) {
    if (s == "single") return EventClass::single;
    if (s == "multiple") return EventClass::multiple;
    throw DataError("unknown event class '" + std::string(s) + "'");
}

inline PosTag parse_pos_tag(std::string_view s) {
    for (auto t : {PosTag::NOUN, PosTag::VERB, PosTag::ADJ})
        if (to_string(t) == s) return t;
    throw DataError("unknown POS tag '" + std::string(s) + "'");
}

// Implementations must be safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;

    // Stable description recorded in run manifests, e.g. "mock(seed=7)".
    virtual std::string identity() const = 0;

    virtual double score_frame_entailment(const FrameRef& frame, const std::string& text) const = 0;
    virtual double score_nli(const std::string& premise, const std::string& hypothesis) const = 0;
    virtual std::string generate(const std::string& prompt, const GenerationParams& params) const = 0;
    virtual AlignmentLogits score_alignment(const VideoRef& video, const std::string& text) const = 0;
    virtual std::string generate_nle(const VideoRef& video, const std::string& contrast_caption) const = 0;
    virtual bool judge_entailment(const std::string& premise, const std::string& hypothesis) const = 0;
    virtual EventClass classify_event_count(const std::string& text) const = 0;
    virtual PosTags tag_pos(const std::string& text) const = 0;
};

// Instructions an alignment / NLE backend applies to the video.
inline std::string entailment_instruction(std::string_view text) {
    return "Does this video entail the description \"" + std::string(text) + "\"?";
}

inline std::string nle_instruction(std::string_view contrast_caption) {
    return "What is the misalignment between this video and the description \"" + std::string(contrast_caption) +
           "\"?";
}

}  // namespace concap
