#pragma once

#include "concap/core.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace concap {

// A kept tuple becomes one entailed and one non-entailed example.
inline std::array<EntailmentExample, 2> to_entailment_examples(const ContrastRecord& r) {
    return {EntailmentExample{r.instance_id, r.video, r.caption, 1, std::nullopt},
            EntailmentExample{r.instance_id, r.video, r.contrast_caption, 0, r.misalignment}};
}

inline std::vector<EntailmentExample> to_entailment_examples(const std::vector<ContrastRecord>& records) {
    std::vector<EntailmentExample> out;
    out.reserve(2 * records.size());
    for (const auto& r : records)
        for (auto& e : to_entailment_examples(r)) out.push_back(std::move(e));
    return out;
}

// ---------------------------------------------------------------------------
// Files

// Writes via a sibling temp file and rename, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot move output into place at " + path.string() + ": " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string dump_line(const json& j) {
    try {
        return j.dump(-1, ' ', false, json::error_handler_t::strict);
    } catch (const json::type_error& e) {
        throw DataError(std::string("record is not valid UTF-8: ") + e.what());
    }
}

struct DatasetManifest {
    std::string path;
    std::size_t records = 0;
    std::string sha256;
};

inline void to_json(json& j, const DatasetManifest& m) {
    j = json{{"path", m.path}, {"records", m.records}, {"sha256", m.sha256}};
}

template <typename T>
std::string to_jsonl(const std::vector<T>& records) {
    std::string out;
    for (const auto& r : records) {
        out += dump_line(json(r));
        out += '\n';
    }
    return out;
}

// Writes records in the given order.
template <typename T>
DatasetManifest write_jsonl(const std::vector<T>& records, const std::filesystem::path& path) {
    auto content = to_jsonl(records);
    atomic_write(path, content);
    return {path.string(), records.size(), sha256_hex(content)};
}

// Canonical order: by instance_id, positives before negatives, then by full
// serialized form so that equal ids still order deterministically.
template <typename T>
void sort_canonical(std::vector<T>& records) {
    std::vector<std::pair<std::string, std::size_t>> keys;
    keys.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::string key = r.instance_id + kUnitSep;
        if constexpr (std::is_same_v<T, EntailmentExample>) key += r.label == 1 ? '0' : '1';
        keys.emplace_back(key + kUnitSep + dump_line(json(r)), i);
    }
    std::sort(keys.begin(), keys.end());
    std::vector<T> sorted;
    sorted.reserve(records.size());
    for (const auto& [_, i] : keys) sorted.push_back(std::move(records[i]));
    records = std::move(sorted);
}

template <typename T>
DatasetManifest write_dataset(std::vector<T> records, const std::filesystem::path& path) {
    sort_canonical(records);
    return write_jsonl(records, path);
}

// Reads one record per line; blank lines are skipped. Errors name the line.
// When `lines` is given it receives the source line of each record.
template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path, std::vector<std::size_t>* lines = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line).get<T>());
            if (lines) lines->push_back(lineno);
        } catch (const json::exception& e) {
            throw SchemaError(path.string(), lineno, e.what());
        } catch (const DataError& e) {
            throw SchemaError(path.string(), lineno, e.what());
        }
    }
    return out;
}

template <typename T>
std::vector<T> read_dataset(const std::filesystem::path& path) {
    return read_jsonl<T>(path);
}

// ---------------------------------------------------------------------------
// Statistics

struct Attrition {
    std::size_t parsed = 0;
    std::size_t contradiction_dropped = 0;
    std::size_t nle_dropped = 0;

    bool operator==(const Attrition&) const = default;
};

inline void to_json(json& j, const Attrition& a) {
    j = json{{"parsed", a.parsed}, {"contradiction_dropped", a.contradiction_dropped}, {"nle_dropped", a.nle_dropped}};
}

inline void from_json(const json& j, Attrition& a) {
    a.parsed = j.at("parsed").get<std::size_t>();
    a.contradiction_dropped = j.at("contradiction_dropped").get<std::size_t>();
    a.nle_dropped = j.at("nle_dropped").get<std::size_t>();
}

// Mergeable partial counts; combine() is associative and commutative.
struct StatsCounts {
    std::map<std::pair<VideoSource, Split>, std::size_t> records;
    std::map<MisalignmentType, std::size_t> by_type;

    void add(const ContrastRecord& r) {
        ++records[{r.video.source, r.split}];
        ++by_type[r.misalignment];
    }

    StatsCounts& combine(const StatsCounts& other) {
        for (const auto& [k, v] : other.records) records[k] += v;
        for (const auto& [k, v] : other.by_type) by_type[k] += v;
        return *this;
    }

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& [_, v] : by_type) n += v;
        return n;
    }
};

struct StatsReport {
    std::size_t records = 0;
    // Per (source, split): entailment examples (two per record) and NLE instances (one per record).
    std::map<std::pair<VideoSource, Split>, std::size_t> entailment;
    std::map<std::pair<VideoSource, Split>, std::size_t> nle;
    std::map<MisalignmentType, std::size_t> type_counts;
    std::map<MisalignmentType, double> distribution;
    std::optional<Attrition> attrition;
};

inline StatsReport make_stats_report(const StatsCounts& counts, std::optional<Attrition> attrition = std::nullopt) {
    StatsReport s;
    s.records = counts.total();
    for (const auto& [k, v] : counts.records) {
        s.entailment[k] = 2 * v;
        s.nle[k] = v;
    }
    s.type_counts = counts.by_type;
    if (s.records > 0)
        for (const auto& [m, v] : counts.by_type)
            s.distribution[m] = static_cast<double>(v) / static_cast<double>(s.records);
    s.attrition = attrition;
    return s;
}

inline StatsReport dataset_stats(const std::vector<ContrastRecord>& records,
                                 std::optional<Attrition> attrition = std::nullopt) {
    StatsCounts c;
    for (const auto& r : records) c.add(r);
    return make_stats_report(c, attrition);
}

namespace detail {
inline json split_table(const std::map<std::pair<VideoSource, Split>, std::size_t>& cells) {
    json out = json::object();
    std::map<Split, std::size_t> totals;
    for (const auto& [k, v] : cells) {
        out[std::string(to_string(k.first))][std::string(to_string(k.second))] = v;
        totals[k.second] += v;
    }
    for (auto& [src, row] : out.items())
        for (auto sp : {Split::train, Split::val, Split::test})
            if (!row.contains(std::string(to_string(sp)))) row[std::string(to_string(sp))] = 0;
    json total = json::object();
    for (auto sp : {Split::train, Split::val, Split::test}) total[std::string(to_string(sp))] = totals[sp];
    out["total"] = total;
    return out;
}
}  // namespace detail

inline void to_json(json& j, const StatsReport& s) {
    json dist = json::object(), counts = json::object();
    for (const auto& [m, f] : s.distribution) dist[std::string(to_string(m))] = f;
    for (const auto& [m, n] : s.type_counts) counts[std::string(to_string(m))] = n;
    j = json{{"records", s.records},
             {"entailment", detail::split_table(s.entailment)},
             {"nle", detail::split_table(s.nle)},
             {"misalignment_counts", counts},
             {"misalignment_distribution", dist}};
    j["attrition"] = s.attrition ? json(*s.attrition) : json(nullptr);
}

// Source x split layout: entailment columns then NLE columns, a total row,
// then the type distribution.
inline std::string render_stats_table(const StatsReport& s) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s | %8s %8s %8s | %8s %8s %8s\n", "", "VLE", "", "", "NLE", "", "");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-10s | %8s %8s %8s | %8s %8s %8s\n", "Source", "Train", "Val", "Test", "Train",
                  "Val", "Test");
    out << buf << std::string(66, '-') << "\n";
    std::array<std::size_t, 6> totals{};
    for (auto src : {VideoSource::msrvtt, VideoSource::vatex, VideoSource::tempo, VideoSource::external}) {
        std::array<std::size_t, 6> row{};
        bool any = false;
        int col = 0;
        for (const auto* table : {&s.entailment, &s.nle})
            for (auto sp : {Split::train, Split::val, Split::test}) {
                auto it = table->find({src, sp});
                std::size_t v = it == table->end() ? 0 : it->second;
                any = any || v > 0;
                row[static_cast<std::size_t>(col)] = v;
                totals[static_cast<std::size_t>(col++)] += v;
            }
        if (!any) continue;
        std::snprintf(buf, sizeof buf, "%-10s | %8zu %8zu %8zu | %8zu %8zu %8zu\n", std::string(to_string(src)).c_str(),
                      row[0], row[1], row[2], row[3], row[4], row[5]);
        out << buf;
    }
    out << std::string(66, '-') << "\n";
    std::snprintf(buf, sizeof buf, "%-10s | %8zu %8zu %8zu | %8zu %8zu %8zu\n", "Total", totals[0], totals[1],
                  totals[2], totals[3], totals[4], totals[5]);
    out << buf << "\nMisalignment distribution (" << s.records << " records)\n";
    for (auto m : kAllMisalignments) {
        auto it = s.distribution.find(m);
        double f = it == s.distribution.end() ? 0.0 : it->second;
        auto c = s.type_counts.find(m);
        std::snprintf(buf, sizeof buf, "  %-14s %6zu  %5.1f%%\n", std::string(to_string(m)).c_str(),
                      c == s.type_counts.end() ? std::size_t{0} : c->second, 100.0 * f);
        out << buf;
    }
    if (s.attrition) {
        std::snprintf(buf, sizeof buf, "\nAttrition: parsed %zu, contradiction-dropped %zu, nle-dropped %zu\n",
                      s.attrition->parsed, s.attrition->contradiction_dropped, s.attrition->nle_dropped);
        out << buf;
    }
    return out.str();
}

}  // namespace concap
