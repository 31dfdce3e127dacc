#pragma once

// Domain types shared by every pipeline stage, plus their JSONL schema.

#include "concap/error.hpp"
#include "concap/text.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace concap {

using json = nlohmann::json;

enum class MisalignmentType { object, action, attribute, count, relation, hallucination, event_order };

inline constexpr std::array<MisalignmentType, 7> kAllMisalignments = {
    MisalignmentType::object,    MisalignmentType::action,        MisalignmentType::attribute,
    MisalignmentType::count,     MisalignmentType::relation,      MisalignmentType::hallucination,
    MisalignmentType::event_order,
};

inline std::string_view to_string(MisalignmentType m) {
    switch (m) {
        case MisalignmentType::object: return "object";
        case MisalignmentType::action: return "action";
        case MisalignmentType::attribute: return "attribute";
        case MisalignmentType::count: return "count";
        case MisalignmentType::relation: return "relation";
        case MisalignmentType::hallucination: return "hallucination";
        case MisalignmentType::event_order: return "event-order";
    }
    return "";
}

inline MisalignmentType parse_misalignment(std::string_view token) {
    for (auto m : kAllMisalignments)
        if (to_string(m) == token) return m;
    throw DataError("unknown misalignment type '" + std::string(token) + "'");
}

enum class VideoSource { msrvtt, vatex, tempo, external };

inline std::string_view to_string(VideoSource s) {
    switch (s) {
        case VideoSource::msrvtt: return "msrvtt";
        case VideoSource::vatex: return "vatex";
        case VideoSource::tempo: return "tempo";
        case VideoSource::external: return "external";
    }
    return "";
}

inline VideoSource parse_source(std::string_view token) {
    for (auto s : {VideoSource::msrvtt, VideoSource::vatex, VideoSource::tempo, VideoSource::external})
        if (to_string(s) == token) return s;
    throw DataError("unknown video source '" + std::string(token) + "'");
}

enum class Split { train, val, test };

inline std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "";
}

inline Split parse_split(std::string_view token) {
    for (auto s : {Split::train, Split::val, Split::test})
        if (to_string(s) == token) return s;
    throw DataError("unknown split '" + std::string(token) + "'");
}

// Opaque frame key (path or storage key); only backends resolve it.
using FrameRef = std::string;

struct VideoRef {
    std::string video_id;
    VideoSource source = VideoSource::external;
    std::vector<FrameRef> frames;  // temporal order
    double fps_sampled = 1.0;

    bool operator==(const VideoRef&) const = default;
};

struct CaptionInstance {
    VideoRef video;
    std::string caption;
    Split split = Split::train;
    std::optional<double> a_vle;
    std::optional<bool> challenge_flag;

    bool operator==(const CaptionInstance&) const = default;
};

struct FilterScores {
    std::optional<double> contrast_nli;
    std::optional<double> nle_nli;

    bool operator==(const FilterScores&) const = default;
};

struct ContrastRecord {
    std::string instance_id;
    VideoRef video;
    std::string caption;           // original caption
    std::string contrast_caption;  // misaligned rewrite
    std::string nle;               // explanation of the difference
    MisalignmentType misalignment = MisalignmentType::object;
    std::optional<std::string> source_span;
    std::optional<std::string> target_span;
    Split split = Split::train;
    FilterScores filter_scores;

    bool operator==(const ContrastRecord&) const = default;
};

struct EntailmentExample {
    std::string instance_id;
    VideoRef video;
    std::string text;
    int label = 1;
    std::optional<MisalignmentType> misalignment;  // set only for label 0

    bool operator==(const EntailmentExample&) const = default;
};

// A caption with its assigned misalignment, the input to generation.
struct AssignedCaption {
    CaptionInstance instance;
    MisalignmentType misalignment = MisalignmentType::object;

    bool operator==(const AssignedCaption&) const = default;
};

inline std::string make_instance_id(std::string_view video_id, std::string_view caption, MisalignmentType m) {
    if (trim(video_id).empty()) throw PreconditionError("video_id is empty");
    if (normalize_text(caption).empty()) throw PreconditionError("caption is empty");
    return sha256_hex(join_key(trim(video_id), normalize_text(caption), to_string(m))).substr(0, 16);
}

inline bool is_unit(double v) { return v >= 0.0 && v <= 1.0; }

// ---------------------------------------------------------------------------
// JSON. Readers reject unknown keys and invariant violations with DataError.

namespace detail {

inline void require_keys(const json& j, std::string_view type, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional = {}) {
    if (!j.is_object()) throw DataError(std::string(type) + ": expected a JSON object");
    for (auto k : required)
        if (!j.contains(std::string(k))) throw DataError(std::string(type) + ": missing key '" + std::string(k) + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (auto k : required) known = known || it.key() == k;
        for (auto k : optional) known = known || it.key() == k;
        if (!known) throw DataError(std::string(type) + ": unexpected key '" + it.key() + "'");
    }
}

template <typename T>
T get_as(const json& j, const char* key, std::string_view type) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw DataError(std::string(type) + ": key '" + key + "' has the wrong type");
    }
}

inline std::optional<double> get_unit_opt(const json& j, const char* key, std::string_view type) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    double v = get_as<double>(j, key, type);
    if (!is_unit(v)) throw DataError(std::string(type) + ": '" + key + "' outside [0, 1]");
    return v;
}

inline std::optional<std::string> get_string_opt(const json& j, const char* key, std::string_view type) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get_as<std::string>(j, key, type);
}

}  // namespace detail

inline void to_json(json& j, const VideoRef& v) {
    j = json{{"video_id", v.video_id}, {"source", to_string(v.source)}, {"frames", v.frames},
             {"fps_sampled", v.fps_sampled}};
}

inline void from_json(const json& j, VideoRef& v) {
    detail::require_keys(j, "VideoRef", {"video_id", "source", "frames"}, {"fps_sampled"});
    v.video_id = detail::get_as<std::string>(j, "video_id", "VideoRef");
    if (trim(v.video_id).empty()) throw DataError("VideoRef: video_id is empty");
    v.source = parse_source(detail::get_as<std::string>(j, "source", "VideoRef"));
    v.frames = detail::get_as<std::vector<std::string>>(j, "frames", "VideoRef");
    if (v.frames.empty()) throw DataError("VideoRef: frames list is empty");
    v.fps_sampled = j.contains("fps_sampled") ? detail::get_as<double>(j, "fps_sampled", "VideoRef") : 1.0;
    if (!(v.fps_sampled > 0)) throw DataError("VideoRef: fps_sampled must be positive");
}

inline void to_json(json& j, const CaptionInstance& c) {
    j = json{{"video", c.video}, {"caption", c.caption}, {"split", to_string(c.split)}};
    if (c.a_vle) j["a_vle"] = *c.a_vle;
    if (c.challenge_flag) j["challenge_flag"] = *c.challenge_flag;
}

namespace detail {
inline void read_caption_fields(const json& j, CaptionInstance& c, std::string_view type) {
    c.video = j.at("video").get<VideoRef>();
    c.caption = get_as<std::string>(j, "caption", type);
    if (normalize_text(c.caption).empty()) throw DataError(std::string(type) + ": caption is empty");
    c.split = parse_split(get_as<std::string>(j, "split", type));
    c.a_vle = get_unit_opt(j, "a_vle", type);
    c.challenge_flag = j.contains("challenge_flag") && !j.at("challenge_flag").is_null()
                           ? std::optional<bool>(get_as<bool>(j, "challenge_flag", type))
                           : std::nullopt;
}
}  // namespace detail

inline void from_json(const json& j, CaptionInstance& c) {
    detail::require_keys(j, "CaptionInstance", {"video", "caption", "split"}, {"a_vle", "challenge_flag"});
    detail::read_caption_fields(j, c, "CaptionInstance");
}

inline void to_json(json& j, const AssignedCaption& a) {
    j = a.instance;
    j["misalignment"] = to_string(a.misalignment);
}

inline void from_json(const json& j, AssignedCaption& a) {
    detail::require_keys(j, "AssignedCaption", {"video", "caption", "split", "misalignment"},
                         {"a_vle", "challenge_flag"});
    detail::read_caption_fields(j, a.instance, "AssignedCaption");
    a.misalignment = parse_misalignment(detail::get_as<std::string>(j, "misalignment", "AssignedCaption"));
}

inline void to_json(json& j, const FilterScores& f) {
    j = json::object();
    if (f.contrast_nli) j["contrast_nli"] = *f.contrast_nli;
    if (f.nle_nli) j["nle_nli"] = *f.nle_nli;
}

inline void from_json(const json& j, FilterScores& f) {
    detail::require_keys(j, "FilterScores", {}, {"contrast_nli", "nle_nli"});
    f.contrast_nli = detail::get_unit_opt(j, "contrast_nli", "FilterScores");
    f.nle_nli = detail::get_unit_opt(j, "nle_nli", "FilterScores");
}

// Checks the cross-field invariants of a contrast record.
inline void validate(const ContrastRecord& r) {
    if (normalize_text(r.caption).empty()) throw DataError("ContrastRecord: caption is empty");
    if (normalize_text(r.contrast_caption).empty()) throw DataError("ContrastRecord: contrast_caption is empty");
    if (normalize_text(r.nle).empty()) throw DataError("ContrastRecord: nle is empty");
    if (normalize_text(r.caption) == normalize_text(r.contrast_caption))
        throw DataError("ContrastRecord: contrast_caption equals caption");
    bool wants_spans = r.misalignment != MisalignmentType::event_order;
    if (r.source_span.has_value() != wants_spans || r.target_span.has_value() != wants_spans)
        throw DataError(wants_spans ? "ContrastRecord: source/target spans required"
                                    : "ContrastRecord: event-order records carry no spans");
}

inline void to_json(json& j, const ContrastRecord& r) {
    j = json{{"instance_id", r.instance_id},
             {"video", r.video},
             {"caption", r.caption},
             {"contrast_caption", r.contrast_caption},
             {"nle", r.nle},
             {"misalignment", to_string(r.misalignment)},
             {"split", to_string(r.split)},
             {"filter_scores", r.filter_scores}};
    if (r.source_span) j["source_span"] = *r.source_span;
    if (r.target_span) j["target_span"] = *r.target_span;
}

inline void from_json(const json& j, ContrastRecord& r) {
    constexpr std::string_view type = "ContrastRecord";
    detail::require_keys(j, type,
                         {"instance_id", "video", "caption", "contrast_caption", "nle", "misalignment", "split"},
                         {"source_span", "target_span", "filter_scores"});
    r.instance_id = detail::get_as<std::string>(j, "instance_id", type);
    r.video = j.at("video").get<VideoRef>();
    r.caption = detail::get_as<std::string>(j, "caption", type);
    r.contrast_caption = detail::get_as<std::string>(j, "contrast_caption", type);
    r.nle = detail::get_as<std::string>(j, "nle", type);
    r.misalignment = parse_misalignment(detail::get_as<std::string>(j, "misalignment", type));
    r.source_span = detail::get_string_opt(j, "source_span", type);
    r.target_span = detail::get_string_opt(j, "target_span", type);
    r.split = parse_split(detail::get_as<std::string>(j, "split", type));
    r.filter_scores = j.contains("filter_scores") ? j.at("filter_scores").get<FilterScores>() : FilterScores{};
    validate(r);
}

inline void to_json(json& j, const EntailmentExample& e) {
    j = json{{"instance_id", e.instance_id}, {"video", e.video}, {"text", e.text}, {"label", e.label}};
    if (e.misalignment) j["misalignment"] = to_string(*e.misalignment);
}

inline void from_json(const json& j, EntailmentExample& e) {
    constexpr std::string_view type = "EntailmentExample";
    detail::require_keys(j, type, {"instance_id", "video", "text", "label"}, {"misalignment"});
    e.instance_id = detail::get_as<std::string>(j, "instance_id", type);
    e.video = j.at("video").get<VideoRef>();
    e.text = detail::get_as<std::string>(j, "text", type);
    if (!j.at("label").is_number_integer()) throw DataError("EntailmentExample: label must be an integer");
    e.label = j.at("label").get<int>();
    if (e.label != 0 && e.label != 1) throw DataError("EntailmentExample: label must be 0 or 1");
    auto m = detail::get_string_opt(j, "misalignment", type);
    e.misalignment = m ? std::optional(parse_misalignment(*m)) : std::nullopt;
    if (e.misalignment.has_value() != (e.label == 0))
        throw DataError("EntailmentExample: misalignment must be present exactly when label is 0");
}

}  // namespace concap
