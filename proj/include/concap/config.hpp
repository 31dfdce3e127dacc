#pragma once

// Pipeline configuration: one JSON document, every key overridable from the
// command line, and a checksum over its canonical form for run manifests.

#include "concap/curation.hpp"
#include "concap/gateway.hpp"
#include "concap/http_backend.hpp"
#include "concap/metrics.hpp"
#include "concap/mock_backend.hpp"
#include "concap/scripted_backend.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace concap {

enum class BackendMode { mock, scripted, http };

struct BackendSpec {
    BackendMode mode = BackendMode::mock;
    std::uint64_t seed = 0;   // mock
    std::string fixtures;     // scripted
    std::string url;          // http
    int timeout_ms = 60000;   // http
};

struct Thresholds {
    std::size_t retain_k = 5;
    double challenge_threshold = 0.5;
    double contrast_drop_above = 0.5;
    double nle_drop_below = 0.6;
    double human_hard_threshold = 0.5;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    BackendSpec backend;
    std::map<wire::Endpoint, BackendSpec> routes;  // per-endpoint overrides
    std::size_t concurrency = 8;
    int attempts = 3;
    int retry_backoff_ms = 250;
    bool lexicon_pos = true;
    Thresholds thresholds;
    HumanHardDirection human_hard_direction = HumanHardDirection::keep_below;
    EventGatePolicy event_gate_policy = EventGatePolicy::multiple_only;
    PerTypePositives per_type_positives = PerTypePositives::paired;
    GenerationParams generation;
    std::map<std::string, std::string> paths;  // free-form: corpus, fixtures, output, ...

    void validate() const;
};

// ---------------------------------------------------------------------------
// Enum tokens

inline std::string_view to_string(BackendMode m) {
    switch (m) {
        case BackendMode::mock: return "mock";
        case BackendMode::scripted: return "scripted";
        case BackendMode::http: return "http";
    }
    return "?";
}

inline std::string_view to_string(HumanHardDirection d) {
    return d == HumanHardDirection::keep_below ? "keep_below" : "keep_at_or_above";
}

inline std::string_view to_string(EventGatePolicy p) {
    return p == EventGatePolicy::multiple_only ? "multiple_only" : "all_challenging";
}

inline std::string_view to_string(PerTypePositives p) { return p == PerTypePositives::paired ? "paired" : "all"; }

namespace detail {
template <typename E, std::size_t N>
E parse_token(std::string_view what, std::string_view token, const std::array<E, N>& values) {
    for (auto v : values)
        if (to_string(v) == token) return v;
    std::string allowed;
    for (auto v : values) allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(v));
    throw ConfigError(std::string(what) + ": unknown value '" + std::string(token) + "' (expected one of " + allowed + ")");
}

template <typename T>
T cfg_get(const json& j, const char* key, std::string_view where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + " has the wrong type");
    }
}

inline void cfg_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    try {
        require_keys(j, where, {}, allowed);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}
}  // namespace detail

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const BackendSpec& b) {
    j = json{{"mode", to_string(b.mode)}};
    switch (b.mode) {
        case BackendMode::mock: j["seed"] = b.seed; break;
        case BackendMode::scripted: j["fixtures"] = b.fixtures; break;
        case BackendMode::http:
            j["url"] = b.url;
            j["timeout_ms"] = b.timeout_ms;
            break;
    }
}

inline BackendSpec backend_spec_from_json(const json& j, std::string_view where) {
    detail::cfg_keys(j, where, {"mode", "seed", "fixtures", "url", "timeout_ms"});
    BackendSpec b;
    if (j.contains("mode"))
        b.mode = detail::parse_token(std::string(where) + ".mode", detail::cfg_get<std::string>(j, "mode", where),
                                     std::array{BackendMode::mock, BackendMode::scripted, BackendMode::http});
    if (j.contains("seed")) b.seed = detail::cfg_get<std::uint64_t>(j, "seed", where);
    if (j.contains("fixtures")) b.fixtures = detail::cfg_get<std::string>(j, "fixtures", where);
    if (j.contains("url")) b.url = detail::cfg_get<std::string>(j, "url", where);
    if (j.contains("timeout_ms")) b.timeout_ms = detail::cfg_get<int>(j, "timeout_ms", where);
    return b;
}

inline void to_json(json& j, const PipelineConfig& c) {
    json routes = json::object();
    for (const auto& [e, spec] : c.routes) routes[std::string(wire::name(e))] = spec;
    j = json{{"seed", c.seed},
             {"backend", c.backend},
             {"routes", routes},
             {"concurrency", c.concurrency},
             {"attempts", c.attempts},
             {"retry_backoff_ms", c.retry_backoff_ms},
             {"pos_tagger", c.lexicon_pos ? "lexicon" : "backend"},
             {"thresholds",
              {{"retain_k", c.thresholds.retain_k},
               {"challenge_threshold", c.thresholds.challenge_threshold},
               {"contrast_drop_above", c.thresholds.contrast_drop_above},
               {"nle_drop_below", c.thresholds.nle_drop_below},
               {"human_hard_threshold", c.thresholds.human_hard_threshold}}},
             {"human_hard_direction", to_string(c.human_hard_direction)},
             {"event_gate_policy", to_string(c.event_gate_policy)},
             {"per_type_positives", to_string(c.per_type_positives)},
             {"generation",
              {{"temperature", c.generation.temperature},
               {"max_output_tokens", c.generation.max_output_tokens},
               {"top_p", c.generation.top_p},
               {"top_k", c.generation.top_k}}},
             {"paths", c.paths}};
}

inline void PipelineConfig::validate() const {
    auto unit = [](const char* name, double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("thresholds.") + name + " must lie in [0, 1], got " + json(v).dump());
    };
    unit("challenge_threshold", thresholds.challenge_threshold);
    unit("contrast_drop_above", thresholds.contrast_drop_above);
    unit("nle_drop_below", thresholds.nle_drop_below);
    unit("human_hard_threshold", thresholds.human_hard_threshold);
    if (thresholds.retain_k < 1) throw ConfigError("thresholds.retain_k must be >= 1");
    if (concurrency < 1 || concurrency > Gateway::kMaxInFlight)
        throw ConfigError("concurrency must lie in [1, " + std::to_string(Gateway::kMaxInFlight) + "]");
    if (attempts < 1) throw ConfigError("attempts must be >= 1");
    if (retry_backoff_ms < 0) throw ConfigError("retry_backoff_ms must be >= 0");
    generation.validate();
    auto check_spec = [](const BackendSpec& b, const std::string& where) {
        if (b.mode == BackendMode::scripted && b.fixtures.empty()) throw ConfigError(where + ": scripted mode needs 'fixtures'");
        if (b.mode == BackendMode::http && b.url.empty()) throw ConfigError(where + ": http mode needs 'url'");
        if (b.timeout_ms <= 0) throw ConfigError(where + ": timeout_ms must be positive");
    };
    check_spec(backend, "backend");
    for (const auto& [e, spec] : routes) check_spec(spec, "routes." + std::string(wire::name(e)));
}

// Reads a config document; absent keys keep their defaults. Unknown keys are
// rejected so that typos never silently fall back to a default.
inline PipelineConfig config_from_json(const json& j) {
    constexpr std::string_view top = "config";
    detail::cfg_keys(j, top,
                     {"seed", "backend", "routes", "concurrency", "attempts", "retry_backoff_ms", "pos_tagger",
                      "thresholds", "human_hard_direction", "event_gate_policy", "per_type_positives", "generation",
                      "paths"});
    PipelineConfig c;
    if (j.contains("seed")) c.seed = detail::cfg_get<std::uint64_t>(j, "seed", top);
    if (j.contains("backend")) c.backend = backend_spec_from_json(j.at("backend"), "backend");
    if (j.contains("routes")) {
        const auto& r = j.at("routes");
        if (!r.is_object()) throw ConfigError("routes must be an object");
        for (auto it = r.begin(); it != r.end(); ++it) {
            auto e = std::find_if(wire::kEndpoints.begin(), wire::kEndpoints.end(),
                                  [&](wire::Endpoint x) { return wire::name(x) == it.key(); });
            if (e == wire::kEndpoints.end()) throw ConfigError("routes: unknown endpoint '" + it.key() + "'");
            c.routes[*e] = backend_spec_from_json(it.value(), "routes." + it.key());
        }
    }
    if (j.contains("concurrency")) c.concurrency = detail::cfg_get<std::size_t>(j, "concurrency", top);
    if (j.contains("attempts")) c.attempts = detail::cfg_get<int>(j, "attempts", top);
    if (j.contains("retry_backoff_ms")) c.retry_backoff_ms = detail::cfg_get<int>(j, "retry_backoff_ms", top);
    if (j.contains("pos_tagger")) {
        auto t = detail::cfg_get<std::string>(j, "pos_tagger", top);
        if (t != "lexicon" && t != "backend") throw ConfigError("pos_tagger must be 'lexicon' or 'backend'");
        c.lexicon_pos = t == "lexicon";
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        constexpr std::string_view where = "thresholds";
        detail::cfg_keys(t, where,
                         {"retain_k", "challenge_threshold", "contrast_drop_above", "nle_drop_below",
                          "human_hard_threshold"});
        if (t.contains("retain_k")) {
            if (!t.at("retain_k").is_number_integer() || t.at("retain_k").get<long long>() < 1)
                throw ConfigError("thresholds.retain_k must be an integer >= 1");
            c.thresholds.retain_k = t.at("retain_k").get<std::size_t>();
        }
        if (t.contains("challenge_threshold")) c.thresholds.challenge_threshold = detail::cfg_get<double>(t, "challenge_threshold", where);
        if (t.contains("contrast_drop_above")) c.thresholds.contrast_drop_above = detail::cfg_get<double>(t, "contrast_drop_above", where);
        if (t.contains("nle_drop_below")) c.thresholds.nle_drop_below = detail::cfg_get<double>(t, "nle_drop_below", where);
        if (t.contains("human_hard_threshold")) c.thresholds.human_hard_threshold = detail::cfg_get<double>(t, "human_hard_threshold", where);
    }
    if (j.contains("human_hard_direction"))
        c.human_hard_direction = detail::parse_token("human_hard_direction", detail::cfg_get<std::string>(j, "human_hard_direction", top),
                                                     std::array{HumanHardDirection::keep_below, HumanHardDirection::keep_at_or_above});
    if (j.contains("event_gate_policy"))
        c.event_gate_policy = detail::parse_token("event_gate_policy", detail::cfg_get<std::string>(j, "event_gate_policy", top),
                                                  std::array{EventGatePolicy::multiple_only, EventGatePolicy::all_challenging});
    if (j.contains("per_type_positives"))
        c.per_type_positives = detail::parse_token("per_type_positives", detail::cfg_get<std::string>(j, "per_type_positives", top),
                                                   std::array{PerTypePositives::paired, PerTypePositives::all});
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        constexpr std::string_view where = "generation";
        detail::cfg_keys(g, where, {"temperature", "max_output_tokens", "top_p", "top_k"});
        if (g.contains("temperature")) c.generation.temperature = detail::cfg_get<double>(g, "temperature", where);
        if (g.contains("max_output_tokens")) c.generation.max_output_tokens = detail::cfg_get<int>(g, "max_output_tokens", where);
        if (g.contains("top_p")) c.generation.top_p = detail::cfg_get<double>(g, "top_p", where);
        if (g.contains("top_k")) c.generation.top_k = detail::cfg_get<int>(g, "top_k", where);
    }
    if (j.contains("paths")) c.paths = detail::cfg_get<std::map<std::string, std::string>>(j, "paths", top);
    c.validate();
    return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

// Applies "a.b.c=value" overrides to the JSON form. Values parse as JSON when
// they can and fall back to plain strings otherwise.
inline json apply_overrides(json doc, const std::vector<std::string>& assignments) {
    for (const auto& a : assignments) {
        auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' is not key=value");
        std::string key = a.substr(0, eq), raw = a.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        std::string pointer = "/" + key;
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        doc[json::json_pointer(pointer)] = value;
    }
    return doc;
}

// Hash of the canonical (sorted-key, compact) serialization.
inline std::string config_checksum(const PipelineConfig& c) { return sha256_hex(json(c).dump()); }

// ---------------------------------------------------------------------------
// Backends

// Sends each operation to its own backend, falling back to a default one.
class RoutingBackend final : public Backend {
public:
    RoutingBackend(std::shared_ptr<const Backend> fallback, std::map<wire::Endpoint, std::shared_ptr<const Backend>> routes)
        : fallback_(std::move(fallback)), routes_(std::move(routes)) {}

    std::string identity() const override {
        std::string s = fallback_->identity();
        for (const auto& [e, b] : routes_) s += ";" + std::string(wire::name(e)) + "=" + b->identity();
        return s;
    }

    double score_frame_entailment(const FrameRef& f, const std::string& t) const override {
        return at(wire::Endpoint::vnli).score_frame_entailment(f, t);
    }
    double score_nli(const std::string& p, const std::string& h) const override { return at(wire::Endpoint::nli).score_nli(p, h); }
    std::string generate(const std::string& p, const GenerationParams& g) const override {
        return at(wire::Endpoint::generate).generate(p, g);
    }
    AlignmentLogits score_alignment(const VideoRef& v, const std::string& t) const override {
        return at(wire::Endpoint::align).score_alignment(v, t);
    }
    std::string generate_nle(const VideoRef& v, const std::string& c) const override {
        return at(wire::Endpoint::nle).generate_nle(v, c);
    }
    bool judge_entailment(const std::string& p, const std::string& h) const override {
        return at(wire::Endpoint::judge).judge_entailment(p, h);
    }
    EventClass classify_event_count(const std::string& t) const override {
        return at(wire::Endpoint::events).classify_event_count(t);
    }
    PosTags tag_pos(const std::string& t) const override { return at(wire::Endpoint::pos).tag_pos(t); }

private:
    const Backend& at(wire::Endpoint e) const {
        auto it = routes_.find(e);
        return it == routes_.end() ? *fallback_ : *it->second;
    }

    std::shared_ptr<const Backend> fallback_;
    std::map<wire::Endpoint, std::shared_ptr<const Backend>> routes_;
};

inline std::shared_ptr<const Backend> make_backend(const BackendSpec& spec) {
    switch (spec.mode) {
        case BackendMode::mock: return std::make_shared<MockBackend>(spec.seed);
        case BackendMode::scripted: return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(spec.fixtures));
        case BackendMode::http: return std::make_shared<HttpBackend>(spec.url, std::chrono::milliseconds(spec.timeout_ms));
    }
    throw ConfigError("unknown backend mode");
}

inline std::shared_ptr<const Backend> make_backend(const PipelineConfig& c) {
    auto fallback = make_backend(c.backend);
    if (c.routes.empty()) return fallback;
    std::map<wire::Endpoint, std::shared_ptr<const Backend>> routes;
    for (const auto& [e, spec] : c.routes) routes[e] = make_backend(spec);
    return std::make_shared<RoutingBackend>(fallback, std::move(routes));
}

inline GatewayOptions gateway_options(const PipelineConfig& c) {
    GatewayOptions o;
    o.max_in_flight = c.concurrency;
    o.attempts = c.attempts;
    o.initial_backoff = std::chrono::milliseconds(c.retry_backoff_ms);
    o.lexicon_pos = c.lexicon_pos;
    return o;
}

}  // namespace concap
