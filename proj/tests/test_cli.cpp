#include "concap/dataset.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <fstream>

using namespace concap;
using testing::quote;
using testing::run_cli;

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("").status == 1);
    CHECK(run_cli("teleport").status == 1);
    CHECK(run_cli("assign").status == 1);
    CHECK(run_cli("--help").status == 0);
}

TEST_CASE("invalid thresholds exit 1 before any work") {
    testing::TempDir dir;
    auto r = run_cli("score-temporal -i " + quote(testing::fixture("golden/corpus.jsonl")) + " -o " +
                     quote(dir / "s.jsonl") + " --set thresholds.nle_drop_below=1.2");
    CHECK(r.status == 1);
    CHECK(r.output.find("nle_drop_below") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "s.jsonl"));
    CHECK(run_cli("stats -i " + quote(testing::fixture("golden/corpus.jsonl")) + " --concurrency 0").status == 1);
    CHECK(run_cli("stats -i x --set bogus=1").status == 1);
}

TEST_CASE("data errors exit 2") {
    testing::TempDir dir;
    std::ofstream(dir / "bad.jsonl") << "{not json\n";
    auto r = run_cli("stats -i " + quote(dir / "bad.jsonl"));
    CHECK(r.status == 2);
    CHECK(r.output.find("bad.jsonl:1") != std::string::npos);
    CHECK(run_cli("stats -i " + quote(dir / "absent.jsonl")).status == 2);
}

TEST_CASE("backend errors exit 3") {
    testing::TempDir dir;
    std::ofstream(dir / "fx.json") << "{}";
    auto r = run_cli("score-temporal -i " + quote(testing::fixture("golden/corpus.jsonl")) + " -o " +
                     quote(dir / "s.jsonl") + " --backend scripted --fixtures " + quote(dir / "fx.json"));
    CHECK(r.status == 3);
    CHECK(r.output.find("corpus.jsonl:1") != std::string::npos);
}

TEST_CASE("stats on an empty dataset exits 0") {
    testing::TempDir dir;
    std::ofstream(dir / "empty.jsonl").close();
    auto r = run_cli("stats -i " + quote(dir / "empty.jsonl"));
    CHECK(r.status == 0);
    CHECK(r.output.find("(0 records)") != std::string::npos);
}

TEST_CASE("stages run from the CLI and rerun from their manifest") {
    testing::TempDir dir;
    auto common = std::string(" --backend mock --mock-seed 2 --seed 5");
    REQUIRE(run_cli("score-temporal -i " + quote(testing::fixture("golden/corpus.jsonl")) + " -o " +
                    quote(dir / "s.jsonl") + common)
                .status == 0);
    auto r = run_cli("select-hard -i " + quote(dir / "s.jsonl") + " -o " + quote(dir / "h.jsonl") + " --retain-k 2");
    REQUIRE(r.status == 0);
    CHECK(read_jsonl<CaptionInstance>(dir / "h.jsonl").size() == 2 * 9 + 3);
    auto first = read_file(dir / "h.jsonl");
    std::filesystem::remove(dir / "h.jsonl");
    CHECK(run_cli("rerun " + quote(dir / "h.jsonl.manifest.json")).status == 0);
    CHECK(read_file(dir / "h.jsonl") == first);
    auto m = json::parse(read_file(dir / "s.jsonl.manifest.json"));
    CHECK(m["seed"] == 5);
    CHECK(m["config"]["backend"]["seed"] == 2);
}

TEST_CASE("evaluation subcommands write reports") {
    testing::TempDir dir;
    std::vector<ContrastRecord> rs;
    for (int i = 0; i < 6; ++i) rs.push_back(testing::record("v" + std::to_string(i), i));
    write_jsonl(rs, dir / "contrast.jsonl");
    write_jsonl(to_entailment_examples(rs), dir / "entailment.jsonl");
    auto r = run_cli("eval-entailment -i " + quote(dir / "entailment.jsonl") + " -o " + quote(dir / "ent.json"));
    REQUIRE(r.status == 0);
    auto rep = json::parse(read_file(dir / "ent.json"));
    CHECK(rep["task"] == "entailment");
    CHECK(rep["evaluated"] == 12);
    CHECK(rep["run"]["backend"] == "mock(seed=0)+lexicon-pos");
    CHECK(run_cli("eval-nle -i " + quote(dir / "contrast.jsonl") + " -o " + quote(dir / "nle.json")).status == 0);

    std::vector<VideoRef> vids;
    for (int i = 0; i < 4; ++i) vids.push_back(testing::video("v" + std::to_string(i)));
    write_jsonl(vids, dir / "videos.jsonl");
    {
        std::ofstream q(dir / "queries.jsonl");
        q << R"({"query_id": "q1", "text": "a dog", "relevant_video_ids": ["v1"]})" << "\n";
        std::ofstream v(dir / "vqa.jsonl");
        v << R"({"question_id": "x", "video_id": "v2", "question": "what is shown", )"
          << R"("choices": ["a", "b", "c", "d", "e"], "answer_index": 3})" << "\n";
    }
    CHECK(run_cli("eval-retrieval --queries " + quote(dir / "queries.jsonl") + " --candidates " +
                  quote(dir / "videos.jsonl") + " -o " + quote(dir / "ret.json"))
              .status == 0);
    CHECK(json::parse(read_file(dir / "ret.json"))["metrics"].contains("map"));
    CHECK(run_cli("eval-vqa -i " + quote(dir / "vqa.jsonl") + " --videos " + quote(dir / "videos.jsonl") + " -o " +
                  quote(dir / "vqa.json"))
              .status == 0);
    CHECK(json::parse(read_file(dir / "vqa.json"))["evaluated"] == 1);
}
