#pragma once

#include "concap/wire.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

namespace concap {

// Answers from a fixture table and fails on anything unlisted.
//
// Fixture document (every section optional):
//   {"vnli":     [{"frame", "text", "score"}],
//    "nli":      [{"premise", "hypothesis", "score"}],
//    "generate": [{"prompt" | "prompt_sha256", "text"}],
//    "align":    [{"video_id", "text", "s_yes", "s_no"}],
//    "nle":      [{"video_id", "contrast_caption", "text"}],
//    "judge":    [{"premise", "hypothesis", "entailed"}],
//    "events":   [{"text", "label"}],
//    "pos":      [{"text", "tags"}]}
//
// Response values are passed through unchecked; range validation is the
// gateway's job, so a bad fixture surfaces as an invalid-response error.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(const json& fixtures, std::string name = "inline") : name_(std::move(name)) { load(fixtures); }

    static ScriptedBackend from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open fixture file " + path.string());
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("fixture file " + path.string() + ": " + e.what());
        }
        return ScriptedBackend(doc, path.filename().string());
    }

    std::string identity() const override { return "scripted(" + name_ + ")"; }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [_, table] : tables_) n += table.size();
        return n;
    }

    double score_frame_entailment(const FrameRef& frame, const std::string& text) const override {
        return wire::parse_score(wire::Endpoint::vnli, lookup(wire::Endpoint::vnli, join_key(frame, text), "unknown frame/text pair"));
    }

    double score_nli(const std::string& premise, const std::string& hypothesis) const override {
        return wire::parse_score(wire::Endpoint::nli, lookup(wire::Endpoint::nli, join_key(premise, hypothesis)));
    }

    std::string generate(const std::string& prompt, const GenerationParams&) const override {
        return wire::parse_text(wire::Endpoint::generate, lookup(wire::Endpoint::generate, sha256_hex(prompt)));
    }

    AlignmentLogits score_alignment(const VideoRef& video, const std::string& text) const override {
        return wire::parse_align(lookup(wire::Endpoint::align, join_key(video.video_id, text)));
    }

    std::string generate_nle(const VideoRef& video, const std::string& contrast_caption) const override {
        return wire::parse_text(wire::Endpoint::nle, lookup(wire::Endpoint::nle, join_key(video.video_id, contrast_caption)));
    }

    bool judge_entailment(const std::string& premise, const std::string& hypothesis) const override {
        return wire::parse_judge(lookup(wire::Endpoint::judge, join_key(premise, hypothesis)));
    }

    EventClass classify_event_count(const std::string& text) const override {
        return wire::parse_events(lookup(wire::Endpoint::events, text));
    }

    PosTags tag_pos(const std::string& text) const override {
        return wire::parse_pos(lookup(wire::Endpoint::pos, text));
    }

private:
    static std::string printable(const std::string& key) {
        std::string out = key;
        for (auto& c : out)
            if (c == kUnitSep) c = '|';
        return out;
    }

    static std::string entry_key(wire::Endpoint e, const json& entry) {
        auto str = [&](const char* k) {
            if (!entry.contains(k) || !entry.at(k).is_string())
                throw ConfigError("fixture " + wire::name(e) + " entry lacks string field '" + k + "'");
            return entry.at(k).get<std::string>();
        };
        switch (e) {
            case wire::Endpoint::vnli: return join_key(str("frame"), str("text"));
            case wire::Endpoint::nli:
            case wire::Endpoint::judge: return join_key(str("premise"), str("hypothesis"));
            case wire::Endpoint::generate:
                return entry.contains("prompt_sha256") ? str("prompt_sha256") : sha256_hex(str("prompt"));
            case wire::Endpoint::align: return join_key(str("video_id"), str("text"));
            case wire::Endpoint::nle: return join_key(str("video_id"), str("contrast_caption"));
            case wire::Endpoint::events:
            case wire::Endpoint::pos: return str("text");
        }
        return {};
    }

    void load(const json& doc) {
        if (!doc.is_object()) throw ConfigError("fixture document must be a JSON object");
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            auto found = std::find_if(wire::kEndpoints.begin(), wire::kEndpoints.end(),
                                      [&](auto e) { return wire::name(e) == it.key(); });
            if (found == wire::kEndpoints.end()) throw ConfigError("fixture has unknown section '" + it.key() + "'");
            if (!it.value().is_array()) throw ConfigError("fixture section '" + it.key() + "' must be an array");
            auto& table = tables_[*found];
            for (const auto& entry : it.value()) {
                auto key = entry_key(*found, entry);
                auto [pos, inserted] = table.emplace(key, entry);
                if (!inserted && pos->second != entry)
                    throw ConfigError("fixture section '" + it.key() + "' has conflicting entries for " + printable(key));
            }
        }
    }

    const json& lookup(wire::Endpoint e, const std::string& key, const char* what = "no fixture entry") const {
        auto t = tables_.find(e);
        if (t != tables_.end()) {
            auto hit = t->second.find(key);
            if (hit != t->second.end()) return hit->second;
        }
        throw BackendError(BackendFailure::unknown_key, wire::name(e), std::string(what) + ": missing key " + printable(key));
    }

    std::string name_;
    std::map<wire::Endpoint, std::map<std::string, json>> tables_;
};

}  // namespace concap
