#pragma once

// Parsing of contrast-caption completions and the two NLI quality filters.

#include "concap/gateway.hpp"
#include "concap/prompts.hpp"

#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace concap {

struct ParsedGeneration {
    std::string contrast_caption;
    std::optional<std::string> source_span;
    std::optional<std::string> target_span;
    std::string nle;

    bool operator==(const ParsedGeneration&) const = default;
};

enum class ParseFailure { missing_field, ambiguous_field };

class ParseError : public DataError {
public:
    ParseError(ParseFailure kind, std::string label)
        : DataError(std::string(kind == ParseFailure::missing_field ? "missing-field" : "ambiguous-field") + ": '" +
                    label + "'"),
          kind_(kind), label_(std::move(label)) {}
    ParseFailure kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }

private:
    ParseFailure kind_;
    std::string label_;
};

namespace detail {

enum class Field { input, contrast, source, target, nle };

struct LabelPattern {
    Field field;
    const char* name;
    std::regex re;
};

inline const std::vector<LabelPattern>& label_patterns() {
    static const std::vector<LabelPattern> p = [] {
        auto icase = std::regex::ECMAScript | std::regex::icase;
        return std::vector<LabelPattern>{
            {Field::input, "Input Sentence", std::regex(R"(^\s*input\s+sentence\s*:)", icase)},
            {Field::contrast, "Sentence + Misalignment", std::regex(R"(^\s*sentence\s*\+[^:\n]*:)", icase)},
            {Field::source, "Source", std::regex(R"(^\s*source\s*:)", icase)},
            {Field::target, "Target", std::regex(R"(^\s*target\s*:)", icase)},
            {Field::nle, "Correct Misalignment", std::regex(R"(^\s*correct\s+misalignment\s*:)", icase)},
        };
    }();
    return p;
}

inline std::string strip_quotes(std::string s) {
    s = trim(s);
    auto strip_pair = [&](std::string_view open, std::string_view close) {
        if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
            s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
            return true;
        }
        return false;
    };
    while (strip_pair("\"", "\"") || strip_pair("'", "'") || strip_pair("“", "”") ||
           strip_pair("``", "''") || strip_pair("``", "\"")) {
    }
    return s;
}

}  // namespace detail

// Extracts the labeled fields of a completion. Labels match at line starts,
// case-insensitively; a value runs until the next known label or the end of
// the text. Event-order completions carry no spans.
inline ParsedGeneration parse_generation(MisalignmentType m, std::string_view raw) {
    using detail::Field;
    if (trim(raw).empty()) throw PreconditionError("completion is empty");

    std::vector<std::optional<std::string>> values(5);
    std::vector<int> seen(5, 0);
    std::optional<Field> current;
    std::string buffer;
    auto flush = [&] {
        if (current) values[static_cast<std::size_t>(*current)] = buffer;
        buffer.clear();
    };

    std::size_t b = 0;
    while (b <= raw.size()) {
        auto e = raw.find('\n', b);
        if (e == std::string_view::npos) e = raw.size();
        std::string line(raw.substr(b, e - b));
        b = e + 1;

        bool matched = false;
        for (const auto& lp : detail::label_patterns()) {
            std::smatch mt;
            if (std::regex_search(line, mt, lp.re, std::regex_constants::match_continuous)) {
                flush();
                current = lp.field;
                if (++seen[static_cast<std::size_t>(lp.field)] > 1) throw ParseError(ParseFailure::ambiguous_field, lp.name);
                buffer = line.substr(static_cast<std::size_t>(mt.length(0)));
                matched = true;
                break;
            }
        }
        if (!matched && current) buffer += "\n" + line;
        if (e == raw.size()) break;
    }
    flush();

    auto take = [&](Field f, const char* label) {
        auto& v = values[static_cast<std::size_t>(f)];
        std::string s = v ? detail::strip_quotes(*v) : std::string();
        if (s.empty()) throw ParseError(ParseFailure::missing_field, label);
        return s;
    };

    ParsedGeneration out;
    out.contrast_caption = take(Field::contrast, std::string(contrast_label(m)).c_str());
    if (m != MisalignmentType::event_order) {
        out.source_span = take(Field::source, "Source");
        out.target_span = take(Field::target, "Target");
    }
    out.nle = take(Field::nle, "Correct Misalignment");
    return out;
}

// ---------------------------------------------------------------------------
// Filters

struct FilterDecision {
    bool keep = true;
    double score = 0;
};

// Drops contrast captions the NLI model finds entailed by the original.
inline FilterDecision contrast_contradiction_filter(const Gateway& gw, const std::string& caption,
                                                    const std::string& contrast, double drop_above = 0.5) {
    double s = gw.score_nli(caption, contrast);
    return {!(s > drop_above), s};
}

struct NlePremise {
    std::string premise;
    std::string hypothesis_prefix;

    std::string hypothesis(std::string_view nle) const { return hypothesis_prefix + std::string(nle); }
};

inline NlePremise format_nle_premise(std::string_view caption, std::string_view contrast) {
    if (trim(caption).empty() || trim(contrast).empty()) throw PreconditionError("captions must be non-empty");
    return {"Expected Caption: " + std::string(caption) + " Actual Caption: " + std::string(contrast),
            "Difference between Expected and Actual Caption: "};
}

// Drops explanations not entailed by the caption pair.
inline FilterDecision nle_faithfulness_filter(const Gateway& gw, const std::string& caption, const std::string& contrast,
                                              const std::string& nle, double drop_below = 0.6) {
    auto f = format_nle_premise(caption, contrast);
    double s = gw.score_nli(f.premise, f.hypothesis(nle));
    return {!(s < drop_below), s};
}

}  // namespace concap
