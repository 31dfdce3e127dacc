#pragma once

// Prompt templates are shipped as data files (data/prompts/<version>/) and
// embedded at build time into concap/prompt_templates.hpp.

#include "concap/core.hpp"
#include "concap/prompt_templates.hpp"

#include <array>
#include <string>
#include <string_view>

namespace concap {

inline constexpr std::string_view kCaptionSlot = "<insert caption>";

inline std::string_view prompt_template(MisalignmentType m) {
    switch (m) {
        case MisalignmentType::object: return templates::object;
        case MisalignmentType::action: return templates::action;
        case MisalignmentType::attribute: return templates::attribute;
        case MisalignmentType::count: return templates::count;
        case MisalignmentType::relation: return templates::relation;
        case MisalignmentType::hallucination: return templates::hallucination;
        case MisalignmentType::event_order: return templates::event_order;
    }
    return {};
}

// The label that introduces the contrast caption in each template.
inline std::string_view contrast_label(MisalignmentType m) {
    switch (m) {
        case MisalignmentType::object: return "Sentence + Object Misalignment";
        case MisalignmentType::action: return "Sentence + Action Misalignment";
        case MisalignmentType::attribute: return "Sentence + Attribute Misalignment";
        case MisalignmentType::count: return "Sentence + Counting Misalignment";
        case MisalignmentType::relation: return "Sentence + Relation Misalignment";
        case MisalignmentType::hallucination: return "Sentence + Hallucination";
        case MisalignmentType::event_order: return "Sentence + Event Misalignment";
    }
    return {};
}

inline std::string replace_once(std::string_view text, std::string_view slot, std::string_view value) {
    auto pos = text.rfind(slot);
    if (pos == std::string_view::npos) throw ConfigError("template lacks slot '" + std::string(slot) + "'");
    std::string out(text.substr(0, pos));
    out += value;
    out += text.substr(pos + slot.size());
    return out;
}

inline std::string render_prompt(MisalignmentType m, std::string_view caption) {
    if (normalize_text(caption).empty()) throw PreconditionError("caption is empty");
    return replace_once(prompt_template(m), kCaptionSlot, trim(caption));
}

inline std::string render_recast_prompt(std::string_view question, const std::array<std::string, 5>& choices) {
    if (normalize_text(question).empty()) throw PreconditionError("question is empty");
    std::string out = replace_once(templates::qa_recast, "<question>", trim(question));
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (normalize_text(choices[i]).empty()) throw PreconditionError("choice " + std::to_string(i) + " is empty");
        std::string slot = std::string("<choice ") + static_cast<char>('A' + i) + ">";
        out = replace_once(out, slot, trim(choices[i]));
    }
    return out;
}

}  // namespace concap
