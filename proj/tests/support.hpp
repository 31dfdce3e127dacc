#pragma once

#include "concap/core.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(CONCAP_FIXTURE_DIR) / rel; }
inline fs::path source_dir() { return fs::path(CONCAP_SOURCE_DIR); }

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("concap-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

struct RunResult {
    int status = -1;
    std::string output;  // stdout and stderr interleaved
};

// Runs the concap CLI with the given argument string.
inline RunResult run_cli(const std::string& args) {
    std::string cmd = std::string("\"") + CONCAP_CLI + "\" " + args + " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

inline std::string quote(const fs::path& p) { return "\"" + p.string() + "\""; }

inline concap::VideoRef video(const std::string& id, concap::VideoSource src = concap::VideoSource::msrvtt) {
    return {id, src, {id + "/frame_000.jpg", id + "/frame_001.jpg"}, 1.0};
}

// A valid kept record for caption number `i` of video `vid`.
inline concap::ContrastRecord record(const std::string& vid, int i,
                                     concap::MisalignmentType m = concap::MisalignmentType::object,
                                     concap::Split split = concap::Split::train,
                                     concap::VideoSource src = concap::VideoSource::msrvtt) {
    concap::ContrastRecord r;
    r.video = video(vid, src);
    r.caption = "caption " + std::to_string(i) + " of " + vid;
    r.contrast_caption = "contrast " + std::to_string(i) + " of " + vid;
    r.nle = "the video shows caption " + std::to_string(i);
    r.misalignment = m;
    if (m != concap::MisalignmentType::event_order) {
        r.source_span = "caption";
        r.target_span = "contrast";
    }
    r.split = split;
    r.instance_id = concap::make_instance_id(vid, r.caption, m);
    r.filter_scores = {0.1, 0.9};
    return r;
}

}  // namespace testing
