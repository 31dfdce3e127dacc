#pragma once

// JSON bodies of the /v1/ inference protocol. Requests and responses use
// exactly these keys; both sides validate strictly.
//
//   vnli     {frame, text}                                  -> {score}
//   nli      {premise, hypothesis}                          -> {score}
//   generate {prompt, temperature, max_output_tokens,
//             top_p, top_k}                                 -> {text}
//   align    {video_id, frames, text}                       -> {s_yes, s_no}
//   nle      {video_id, frames, contrast_caption}           -> {text}
//   judge    {premise, hypothesis}                          -> {entailed}
//   events   {text}                                         -> {label}
//   pos      {text}                                         -> {tags}

#include "concap/backend.hpp"

#include <array>
#include <string>

namespace concap::wire {

enum class Endpoint { vnli, nli, generate, align, nle, judge, events, pos };

inline constexpr std::array<Endpoint, 8> kEndpoints = {Endpoint::vnli,  Endpoint::nli,    Endpoint::generate,
                                                       Endpoint::align, Endpoint::nle,    Endpoint::judge,
                                                       Endpoint::events, Endpoint::pos};

inline std::string name(Endpoint e) {
    switch (e) {
        case Endpoint::vnli: return "vnli";
        case Endpoint::nli: return "nli";
        case Endpoint::generate: return "generate";
        case Endpoint::align: return "align";
        case Endpoint::nle: return "nle";
        case Endpoint::judge: return "judge";
        case Endpoint::events: return "events";
        case Endpoint::pos: return "pos";
    }
    return "";
}

inline std::string path(Endpoint e) { return "/v1/" + name(e); }

// ---- requests ----

inline json vnli_request(const FrameRef& frame, const std::string& text) { return {{"frame", frame}, {"text", text}}; }

inline json nli_request(const std::string& premise, const std::string& hypothesis) {
    return {{"premise", premise}, {"hypothesis", hypothesis}};
}

inline json generate_request(const std::string& prompt, const GenerationParams& p) {
    return {{"prompt", prompt},
            {"temperature", p.temperature},
            {"max_output_tokens", p.max_output_tokens},
            {"top_p", p.top_p},
            {"top_k", p.top_k}};
}

inline json align_request(const VideoRef& v, const std::string& text) {
    return {{"video_id", v.video_id}, {"frames", v.frames}, {"text", text}};
}

inline json nle_request(const VideoRef& v, const std::string& contrast_caption) {
    return {{"video_id", v.video_id}, {"frames", v.frames}, {"contrast_caption", contrast_caption}};
}

inline json judge_request(const std::string& premise, const std::string& hypothesis) {
    return {{"premise", premise}, {"hypothesis", hypothesis}};
}

inline json text_request(const std::string& text) { return {{"text", text}}; }

// Server-side view of a request: validates the exact key set and types.
// Throws DataError naming the offending field.
inline void check_request(Endpoint e, const json& body) {
    auto strings = [&](std::initializer_list<std::string_view> keys) {
        concap::detail::require_keys(body, name(e) + " request", keys);
        for (auto k : keys)
            if (!body.at(std::string(k)).is_string())
                throw DataError(name(e) + " request: field '" + std::string(k) + "' must be a string");
    };
    switch (e) {
        case Endpoint::vnli: strings({"frame", "text"}); break;
        case Endpoint::nli:
        case Endpoint::judge: strings({"premise", "hypothesis"}); break;
        case Endpoint::events:
        case Endpoint::pos: strings({"text"}); break;
        case Endpoint::generate: {
            concap::detail::require_keys(body, "generate request",
                                 {"prompt", "temperature", "max_output_tokens", "top_p", "top_k"});
            if (!body.at("prompt").is_string()) throw DataError("generate request: field 'prompt' must be a string");
            for (auto k : {"temperature", "top_p"})
                if (!body.at(k).is_number())
                    throw DataError(std::string("generate request: field '") + k + "' must be a number");
            for (auto k : {"max_output_tokens", "top_k"})
                if (!body.at(k).is_number_integer())
                    throw DataError(std::string("generate request: field '") + k + "' must be an integer");
            break;
        }
        case Endpoint::align:
        case Endpoint::nle: {
            const char* text_key = e == Endpoint::align ? "text" : "contrast_caption";
            concap::detail::require_keys(body, name(e) + " request", {"video_id", "frames", text_key});
            if (!body.at("video_id").is_string())
                throw DataError(name(e) + " request: field 'video_id' must be a string");
            if (!body.at(text_key).is_string())
                throw DataError(name(e) + " request: field '" + text_key + "' must be a string");
            const auto& frames = body.at("frames");
            if (!frames.is_array() || frames.empty())
                throw DataError(name(e) + " request: field 'frames' must be a non-empty array");
            for (const auto& f : frames)
                if (!f.is_string()) throw DataError(name(e) + " request: field 'frames' must hold strings");
            break;
        }
    }
}

inline VideoRef video_from_request(const json& body) {
    VideoRef v;
    v.video_id = body.at("video_id").get<std::string>();
    v.frames = body.at("frames").get<std::vector<std::string>>();
    return v;
}

inline GenerationParams params_from_request(const json& body) {
    GenerationParams p;
    p.temperature = body.at("temperature").get<double>();
    p.max_output_tokens = body.at("max_output_tokens").get<int>();
    p.top_p = body.at("top_p").get<double>();
    p.top_k = body.at("top_k").get<int>();
    return p;
}

// ---- responses ----

inline json score_response(double s) { return {{"score", s}}; }
inline json text_response(const std::string& t) { return {{"text", t}}; }
inline json align_response(const AlignmentLogits& l) { return {{"s_yes", l.s_yes}, {"s_no", l.s_no}}; }
inline json judge_response(bool entailed) { return {{"entailed", entailed}}; }
inline json events_response(EventClass c) { return {{"label", std::string(to_string(c))}}; }

inline json pos_response(const PosTags& tags) {
    json arr = json::array();
    for (auto t : tags) arr.push_back(std::string(to_string(t)));
    return {{"tags", arr}};
}

namespace detail {
[[noreturn]] inline void bad_response(Endpoint e, const std::string& what) {
    throw BackendError(BackendFailure::invalid_response, name(e), what);
}

inline const json& field(Endpoint e, const json& body, const char* key) {
    if (!body.is_object() || !body.contains(key)) bad_response(e, std::string("missing field '") + key + "'");
    return body.at(key);
}
}  // namespace detail

inline double parse_score(Endpoint e, const json& body) {
    const auto& v = detail::field(e, body, "score");
    if (!v.is_number()) detail::bad_response(e, "field 'score' must be a number");
    return v.get<double>();
}

inline std::string parse_text(Endpoint e, const json& body) {
    const auto& v = detail::field(e, body, "text");
    if (!v.is_string()) detail::bad_response(e, "field 'text' must be a string");
    return v.get<std::string>();
}

inline AlignmentLogits parse_align(const json& body) {
    const auto& y = detail::field(Endpoint::align, body, "s_yes");
    const auto& n = detail::field(Endpoint::align, body, "s_no");
    if (!y.is_number() || !n.is_number()) detail::bad_response(Endpoint::align, "s_yes/s_no must be numbers");
    return {y.get<double>(), n.get<double>()};
}

inline bool parse_judge(const json& body) {
    const auto& v = detail::field(Endpoint::judge, body, "entailed");
    if (!v.is_boolean())
        throw BackendError(BackendFailure::unparseable_verdict, "judge", "field 'entailed' must be a boolean");
    return v.get<bool>();
}

inline EventClass parse_events(const json& body) {
    const auto& v = detail::field(Endpoint::events, body, "label");
    if (!v.is_string()) detail::bad_response(Endpoint::events, "field 'label' must be a string");
    try {
        return parse_event_class(v.get<std::string>());
    } catch (const DataError& e) {
        detail::bad_response(Endpoint::events, e.what());
    }
}

inline PosTags parse_pos(const json& body) {
    const auto& v = detail::field(Endpoint::pos, body, "tags");
    if (!v.is_array()) detail::bad_response(Endpoint::pos, "field 'tags' must be an array");
    PosTags tags;
    for (const auto& t : v) {
        if (!t.is_string()) detail::bad_response(Endpoint::pos, "tags must be strings");
        try {
            tags.insert(parse_pos_tag(t.get<std::string>()));
        } catch (const DataError& e) {
            detail::bad_response(Endpoint::pos, e.what());
        }
    }
    return tags;
}

}  // namespace concap::wire
