#pragma once

#include "concap/backend.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <semaphore>
#include <thread>

namespace concap {

struct GatewayOptions {
    std::size_t max_in_flight = 8;
    int attempts = 3;  // transport failures only
    std::chrono::milliseconds initial_backoff{250};
    bool lexicon_pos = true;  // tag_pos answered locally, never by the backend
};

// Client-side front of a Backend: checks preconditions, bounds the number of
// in-flight requests, retries transport failures with exponential backoff, and
// rejects out-of-range responses. Application errors are never retried.
class Gateway {
public:
    static constexpr std::size_t kMaxInFlight = 4096;

    explicit Gateway(std::shared_ptr<const Backend> backend, GatewayOptions options = {})
        : backend_(std::move(backend)), options_(options), slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options.max_in_flight, 1, kMaxInFlight))) {
        if (!backend_) throw ConfigError("gateway needs a backend");
        if (options_.max_in_flight < 1 || options_.max_in_flight > kMaxInFlight)
            throw ConfigError("concurrency cap must lie in [1, " + std::to_string(kMaxInFlight) + "]");
        if (options_.attempts < 1) throw ConfigError("retry attempts must be >= 1");
    }

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    std::string identity() const { return backend_->identity() + (options_.lexicon_pos ? "+lexicon-pos" : ""); }
    const GatewayOptions& options() const { return options_; }
    const Backend& backend() const { return *backend_; }

    // Highest number of simultaneous backend calls observed so far.
    std::size_t peak_in_flight() const { return peak_.load(); }
    std::size_t calls() const { return calls_.load(); }

    double score_frame_entailment(const FrameRef& frame, const std::string& text) const {
        require(!frame.empty(), "frame reference is empty");
        require_text(text, "text");
        return unit_score("vnli", call([&] { return backend_->score_frame_entailment(frame, text); }));
    }

    double score_nli(const std::string& premise, const std::string& hypothesis) const {
        require_text(premise, "premise");
        require_text(hypothesis, "hypothesis");
        return unit_score("nli", call([&] { return backend_->score_nli(premise, hypothesis); }));
    }

    std::string generate(const std::string& prompt, const GenerationParams& params) const {
        require_text(prompt, "prompt");
        params.validate();
        auto text = call([&] { return backend_->generate(prompt, params); });
        if (trim(text).empty()) throw BackendError(BackendFailure::empty_completion, "generate", "completion is empty");
        return text;
    }

    AlignmentLogits score_alignment(const VideoRef& video, const std::string& text) const {
        require(!video.frames.empty(), "video has no frames");
        require_text(text, "text");
        auto l = call([&] { return backend_->score_alignment(video, text); });
        if (!std::isfinite(l.s_yes) || !std::isfinite(l.s_no) || l.s_yes < 0 || l.s_no < 0)
            throw BackendError(BackendFailure::invalid_response, "align", "s_yes/s_no must be finite and nonnegative");
        if (l.s_yes == 0 && l.s_no == 0)
            throw BackendError(BackendFailure::invalid_response, "align", "s_yes and s_no are both zero");
        return l;
    }

    std::string generate_nle(const VideoRef& video, const std::string& contrast_caption) const {
        require(!video.frames.empty(), "video has no frames");
        require_text(contrast_caption, "contrast caption");
        auto text = call([&] { return backend_->generate_nle(video, contrast_caption); });
        if (trim(text).empty()) throw BackendError(BackendFailure::empty_completion, "nle", "explanation is empty");
        return text;
    }

    bool judge_entailment(const std::string& premise, const std::string& hypothesis) const {
        require_text(premise, "premise");
        require_text(hypothesis, "hypothesis");
        return call([&] { return backend_->judge_entailment(premise, hypothesis); });
    }

    EventClass classify_event_count(const std::string& text) const {
        require_text(text, "text");
        return call([&] { return backend_->classify_event_count(text); });
    }

    PosTags tag_pos(const std::string& text) const {
        require_text(text, "text");
        if (options_.lexicon_pos) return lexicon::tag(text);
        return call([&] { return backend_->tag_pos(text); });
    }

private:
    static void require(bool ok, const char* what) {
        if (!ok) throw PreconditionError(what);
    }

    static void require_text(const std::string& s, const char* what) {
        if (normalize_text(s).empty()) throw PreconditionError(std::string(what) + " is empty");
    }

    static double unit_score(const char* endpoint, double v) {
        if (!std::isfinite(v) || !is_unit(v))
            throw BackendError(BackendFailure::invalid_response, endpoint, "score " + std::to_string(v) + " outside [0, 1]");
        return v;
    }

    template <typename Fn>
    auto call(Fn&& fn) const -> decltype(fn()) {
        auto backoff = options_.initial_backoff;
        for (int attempt = 1;; ++attempt) {
            try {
                Slot slot(*this);
                return fn();
            } catch (const BackendError& e) {
                if (e.kind() != BackendFailure::unreachable || attempt >= options_.attempts) throw;
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }

    struct Slot {
        explicit Slot(const Gateway& g) : g(g) {
            g.slots_.acquire();
            ++g.calls_;
            auto now = ++g.in_flight_;
            auto peak = g.peak_.load();
            while (now > peak && !g.peak_.compare_exchange_weak(peak, now)) {
            }
        }
        ~Slot() {
            --g.in_flight_;
            g.slots_.release();
        }
        const Gateway& g;
    };

    std::shared_ptr<const Backend> backend_;
    GatewayOptions options_;
    mutable std::counting_semaphore<kMaxInFlight> slots_;
    mutable std::atomic<std::size_t> in_flight_{0};
    mutable std::atomic<std::size_t> peak_{0};
    mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace concap
