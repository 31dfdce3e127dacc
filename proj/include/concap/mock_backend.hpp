#pragma once

#include "concap/wire.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace concap {

// Seeded pseudo-model. Every answer is a pure function of
// (seed, endpoint, canonical request JSON), so any schedule of concurrent
// calls sees identical responses.
class MockBackend final : public Backend {
public:
    explicit MockBackend(std::uint64_t seed) : seed_(seed) {}

    std::string identity() const override { return "mock(seed=" + std::to_string(seed_) + ")"; }

    std::uint64_t draw(wire::Endpoint e, const json& payload) const {
        return hash64(join_key(std::to_string(seed_), wire::name(e), payload.dump()));
    }

    double unit(wire::Endpoint e, const json& payload) const { return unit_from_u64(draw(e, payload)); }

    double score_frame_entailment(const FrameRef& frame, const std::string& text) const override {
        return unit(wire::Endpoint::vnli, wire::vnli_request(frame, text));
    }

    double score_nli(const std::string& premise, const std::string& hypothesis) const override {
        return unit(wire::Endpoint::nli, wire::nli_request(premise, hypothesis));
    }

    std::string generate(const std::string& prompt, const GenerationParams& params) const override {
        std::uint64_t h = draw(wire::Endpoint::generate, wire::generate_request(prompt, params));
        if (prompt.find("Imperative Statements for every option:") != std::string::npos) return recast_completion(prompt);
        if (auto c = contrast_completion(prompt, h); !c.empty()) return c;
        return "ok " + hex64(h);
    }

    AlignmentLogits score_alignment(const VideoRef& video, const std::string& text) const override {
        double u = unit(wire::Endpoint::align, wire::align_request(video, text));
        return {u, 1.0 - u};
    }

    std::string generate_nle(const VideoRef&, const std::string& contrast_caption) const override {
        return "the video does not show that " + normalize_text(contrast_caption);
    }

    // Entailed when the judge's own pseudo-score reaches 0.5.
    bool judge_entailment(const std::string& premise, const std::string& hypothesis) const override {
        return unit(wire::Endpoint::judge, wire::judge_request(premise, hypothesis)) >= 0.5;
    }

    EventClass classify_event_count(const std::string& text) const override {
        return lexicon::describes_multiple_events(text) ? EventClass::multiple : EventClass::single;
    }

    PosTags tag_pos(const std::string& text) const override { return lexicon::tag(text); }

private:
    static std::vector<std::string> lines_of(const std::string& s) {
        std::vector<std::string> out;
        std::size_t b = 0;
        while (b <= s.size()) {
            auto e = s.find('\n', b);
            if (e == std::string::npos) e = s.size();
            out.push_back(s.substr(b, e - b));
            b = e + 1;
        }
        return out;
    }

    // Five "(X) ..." statements from the final question block of a recast prompt.
    static std::string recast_completion(const std::string& prompt) {
        auto lines = lines_of(prompt);
        std::string question;
        std::vector<std::string> choices;
        for (const auto& l : lines) {
            if (l.starts_with("Question: ")) {
                question = trim(l.substr(10));
                choices.clear();
            } else if (l.size() > 4 && l[0] == '(' && l[2] == ')' && l[1] >= 'A' && l[1] <= 'E') {
                choices.push_back(trim(l.substr(3)));
            }
        }
        std::string out;
        for (std::size_t i = 0; i < choices.size() && i < 5; ++i) {
            char letter = static_cast<char>('A' + i);
            out += std::string("(") + letter + ") " + normalize_text(question) + " : " + choices[i] + "\n";
        }
        return out;
    }

    // Template-shaped answer to a contrast-caption prompt.
    static std::string contrast_completion(const std::string& prompt, std::uint64_t h) {
        std::string caption, label;
        for (const auto& l : lines_of(prompt)) {
            if (l.starts_with("Input Sentence:")) caption = trim(l.substr(15));
            if (l.starts_with("Sentence + ")) label = l.substr(0, l.find(':'));
        }
        if (caption.empty() || label.empty()) return {};
        std::string lower = normalize_text(label);
        std::vector<std::string> words;
        for (std::size_t b = 0; b < caption.size();) {
            auto e = caption.find(' ', b);
            if (e == std::string::npos) e = caption.size();
            if (e > b) words.push_back(caption.substr(b, e - b));
            b = e + 1;
        }

        if (lower.find("event") != std::string::npos) {
            std::string contrast;
            auto pos = caption.find(" and ");
            if (pos != std::string::npos)
                contrast = caption.substr(pos + 5) + " before " + caption.substr(0, pos);
            else
                contrast = "before anything else, " + caption;
            return label + ": " + contrast + "\nCorrect Misalignment: the events in \"" + caption +
                   "\" happen in the opposite order\n";
        }
        if (lower.find("hallucination") != std::string::npos) {
            static const std::vector<std::string> extras = {"while carrying a surfboard", "near a giant sculpture",
                                                            "under a parasol", "along with a frisbee"};
            const auto& extra = extras[scale_draw(h, extras.size())];
            const std::string& last = words.back();
            return label + ": " + caption + " " + extra + "\nSource: \"" + last + "\"\nTarget: \"" + last + " " +
                   extra + "\"\nCorrect Misalignment: there is nothing " + extra + "\n";
        }

        std::vector<std::string> vocab;
        if (lower.find("object") != std::string::npos) vocab = {"cello", "bicycle", "umbrella", "ladder", "kite"};
        else if (lower.find("action") != std::string::npos) vocab = {"juggling", "painting", "climbing", "skipping"};
        else if (lower.find("attribute") != std::string::npos) vocab = {"red", "tiny", "wooden", "shiny"};
        else if (lower.find("relation") != std::string::npos) vocab = {"below", "behind", "inside", "beneath"};
        else if (lower.find("count") != std::string::npos) vocab = {"two", "four", "seven", "nine"};
        else return {};

        std::size_t idx = scale_draw(h, words.size());
        std::size_t pick = static_cast<std::size_t>(h % vocab.size());
        if (normalize_text(vocab[pick]) == normalize_text(words[idx])) pick = (pick + 1) % vocab.size();
        std::string source = words[idx];
        words[idx] = vocab[pick];
        std::string contrast;
        for (const auto& w : words) contrast += (contrast.empty() ? "" : " ") + w;
        return label + ": " + contrast + "\nSource: \"" + source + "\"\nTarget: \"" + vocab[pick] +
               "\"\nCorrect Misalignment: " + caption + " instead of " + vocab[pick] + "\n";
    }

    std::uint64_t seed_;
};

}  // namespace concap
