#pragma once

// HTTP transport for the /v1/ protocol: a client Backend and a server-side
// adapter that exposes any Backend over the same routes.

#include "concap/wire.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>

namespace concap {

inline constexpr const char* kTokenEnvVar = "CONCAP_BACKEND_TOKEN";

inline std::optional<std::string> backend_token_from_env() {
    const char* v = std::getenv(kTokenEnvVar);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(60),
                         std::optional<std::string> token = backend_token_from_env())
        : base_url_(std::move(base_url)), timeout_(timeout), token_(std::move(token)) {}

    std::string identity() const override { return "http(" + base_url_ + ")"; }

    double score_frame_entailment(const FrameRef& frame, const std::string& text) const override {
        return wire::parse_score(wire::Endpoint::vnli, post(wire::Endpoint::vnli, wire::vnli_request(frame, text)));
    }

    double score_nli(const std::string& premise, const std::string& hypothesis) const override {
        return wire::parse_score(wire::Endpoint::nli, post(wire::Endpoint::nli, wire::nli_request(premise, hypothesis)));
    }

    std::string generate(const std::string& prompt, const GenerationParams& params) const override {
        return wire::parse_text(wire::Endpoint::generate,
                                post(wire::Endpoint::generate, wire::generate_request(prompt, params)));
    }

    AlignmentLogits score_alignment(const VideoRef& video, const std::string& text) const override {
        return wire::parse_align(post(wire::Endpoint::align, wire::align_request(video, text)));
    }

    std::string generate_nle(const VideoRef& video, const std::string& contrast_caption) const override {
        return wire::parse_text(wire::Endpoint::nle, post(wire::Endpoint::nle, wire::nle_request(video, contrast_caption)));
    }

    bool judge_entailment(const std::string& premise, const std::string& hypothesis) const override {
        return wire::parse_judge(post(wire::Endpoint::judge, wire::judge_request(premise, hypothesis)));
    }

    EventClass classify_event_count(const std::string& text) const override {
        return wire::parse_events(post(wire::Endpoint::events, wire::text_request(text)));
    }

    PosTags tag_pos(const std::string& text) const override {
        return wire::parse_pos(post(wire::Endpoint::pos, wire::text_request(text)));
    }

private:
    json post(wire::Endpoint e, const json& body) const {
        // One client per call; httplib clients are not meant to be shared across threads.
        httplib::Client client(base_url_);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        httplib::Headers headers;
        if (token_) headers.emplace("Authorization", "Bearer " + *token_);
        auto res = client.Post(wire::path(e), headers, body.dump(), "application/json");
        if (!res) throw BackendError(BackendFailure::unreachable, wire::name(e), httplib::to_string(res.error()));
        if (res->status != 200)
            throw BackendError(BackendFailure::rejected, wire::name(e),
                               "HTTP " + std::to_string(res->status) + ": " + res->body);
        try {
            return json::parse(res->body);
        } catch (const json::parse_error&) {
            throw BackendError(BackendFailure::invalid_response, wire::name(e), "response body is not JSON");
        }
    }

    std::string base_url_;
    std::chrono::milliseconds timeout_;
    std::optional<std::string> token_;
};

// Routes every /v1/ endpoint of `server` to `backend`. Malformed bodies get
// 400 with a field-level message; backend failures map to 404 (unknown key)
// or 502. When `token` is set, requests must carry it as a bearer token.
inline void mount_backend(httplib::Server& server, const Backend& backend, std::optional<std::string> token = {}) {
    for (auto e : wire::kEndpoints) {
        server.Post(wire::path(e), [e, &backend, token](const httplib::Request& req, httplib::Response& res) {
            auto fail = [&](int status, const std::string& msg) {
                res.status = status;
                res.set_content(json{{"error", msg}}.dump(), "application/json");
            };
            if (token && req.get_header_value("Authorization") != "Bearer " + *token) return fail(401, "unauthorized");
            json body;
            try {
                body = json::parse(req.body);
                wire::check_request(e, body);
            } catch (const json::parse_error&) {
                return fail(400, "body is not valid JSON");
            } catch (const DataError& err) {
                return fail(400, err.what());
            }
            try {
                json out;
                switch (e) {
                    case wire::Endpoint::vnli:
                        out = wire::score_response(backend.score_frame_entailment(body["frame"], body["text"]));
                        break;
                    case wire::Endpoint::nli:
                        out = wire::score_response(backend.score_nli(body["premise"], body["hypothesis"]));
                        break;
                    case wire::Endpoint::generate:
                        out = wire::text_response(backend.generate(body["prompt"], wire::params_from_request(body)));
                        break;
                    case wire::Endpoint::align:
                        out = wire::align_response(backend.score_alignment(wire::video_from_request(body), body["text"]));
                        break;
                    case wire::Endpoint::nle:
                        out = wire::text_response(
                            backend.generate_nle(wire::video_from_request(body), body["contrast_caption"]));
                        break;
                    case wire::Endpoint::judge:
                        out = wire::judge_response(backend.judge_entailment(body["premise"], body["hypothesis"]));
                        break;
                    case wire::Endpoint::events:
                        out = wire::events_response(backend.classify_event_count(body["text"]));
                        break;
                    case wire::Endpoint::pos: out = wire::pos_response(backend.tag_pos(body["text"])); break;
                }
                res.set_content(out.dump(), "application/json");
            } catch (const BackendError& err) {
                fail(err.kind() == BackendFailure::unknown_key ? 404 : 502, err.what());
            } catch (const std::exception& err) {
                fail(500, err.what());
            }
        });
    }
}

}  // namespace concap
