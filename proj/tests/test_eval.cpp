#include "concap/dataset.hpp"
#include "concap/eval.hpp"
#include "concap/mock_backend.hpp"
#include "concap/scripted_backend.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace concap;

namespace {
json align(const std::string& vid, const std::string& text, double yes) {
    return {{"video_id", vid}, {"text", text}, {"s_yes", yes}, {"s_no", 1 - yes}};
}
Gateway scripted(const json& fx) { return Gateway(std::make_shared<ScriptedBackend>(fx)); }
}  // namespace

TEST_CASE("entailment evaluation scores every example and reports per type") {
    std::vector<ContrastRecord> rs{testing::record("a", 0, MisalignmentType::object),
                                   testing::record("b", 0, MisalignmentType::count)};
    auto ex = to_entailment_examples(rs);
    json fx = {{"align",
                {align("a", rs[0].caption, 0.9), align("a", rs[0].contrast_caption, 0.2),
                 align("b", rs[1].caption, 0.3), align("b", rs[1].contrast_caption, 0.4)}}};
    auto gw = scripted(fx);
    auto rep = eval_entailment(ex, gw);
    CHECK(rep.metrics.at("roc_auc") == 0.75);
    CHECK(rep.per_type.at(MisalignmentType::object) == 1.0);
    CHECK(rep.per_type.at(MisalignmentType::count) == 0.0);
    CHECK(rep.evaluated == 4);
    CHECK(rep.excluded.empty());
    json j = rep;
    CHECK(j["per_misalignment"]["count"] == 0.0);
}

TEST_CASE("failed instances are excluded and listed") {
    std::vector<ContrastRecord> rs{testing::record("a", 0), testing::record("b", 0)};
    auto ex = to_entailment_examples(rs);
    json fx = {{"align",
                {align("a", rs[0].caption, 0.9), align("a", rs[0].contrast_caption, 0.2),
                 align("b", rs[1].caption, 0.3)}}};
    auto gw = scripted(fx);
    auto rep = eval_entailment(ex, gw);
    CHECK(rep.evaluated == 3);
    REQUIRE(rep.excluded.size() == 1);
    CHECK(rep.excluded[0].first == rs[1].instance_id);
    CHECK(rep.excluded[0].second.find("unknown-key") != std::string::npos);
    CHECK(rep.metrics.at("roc_auc") == 1.0);
    CHECK_THROWS_AS(eval_entailment({}, gw), DataError);
}

TEST_CASE("NLE evaluation averages entailment and judge verdicts") {
    std::vector<ContrastRecord> rs{testing::record("a", 0), testing::record("b", 0)};
    json fx = {{"nle",
                {{{"video_id", "a"}, {"contrast_caption", rs[0].contrast_caption}, {"text", "pa"}},
                 {{"video_id", "b"}, {"contrast_caption", rs[1].contrast_caption}, {"text", "pb"}}}},
               {"nli",
                {{{"premise", rs[0].nle}, {"hypothesis", "pa"}, {"score", 0.8}},
                 {{"premise", rs[1].nle}, {"hypothesis", "pb"}, {"score", 0.2}}}},
               {"judge",
                {{{"premise", rs[0].nle}, {"hypothesis", "pa"}, {"entailed", true}},
                 {{"premise", rs[1].nle}, {"hypothesis", "pb"}, {"entailed", false}}}}};
    auto gw = scripted(fx);
    auto rep = eval_nle(rs, gw);
    CHECK(rep.metrics.at("mean_nli_entailment") == Catch::Approx(0.5));
    CHECK(rep.metrics.at("judge_accuracy") == 0.5);
    CHECK(rep.evaluated == 2);
}

TEST_CASE("retrieval ranks by score with id tie-break") {
    CHECK(rank_candidates({{"c", 0.5}, {"a", 0.5}, {"b", 0.9}}) == std::vector<std::string>{"b", "a", "c"});
    std::vector<VideoRef> cands{testing::video("v1"), testing::video("v2"), testing::video("v3"), testing::video("v4")};
    json fx = {{"align",
                {align("v1", "q", 0.9), align("v2", "q", 0.7), align("v3", "q", 0.5), align("v4", "q", 0.1),
                 align("v1", "r", 0.4), align("v2", "r", 0.4), align("v3", "r", 0.4), align("v4", "r", 0.4)}}};
    auto gw = scripted(fx);
    std::vector<RetrievalQuery> qs{{"q1", "q", {"v1", "v3"}}, {"q2", "r", {"v2"}}};
    auto rep = eval_retrieval(qs, cands, gw);
    CHECK(rep.per_query_ap[0].second == Catch::Approx(5.0 / 6.0));
    CHECK(rep.per_query_ap[1].second == 0.5);
    CHECK(rep.metrics.at("map") == Catch::Approx((5.0 / 6.0 + 0.5) / 2));
    std::vector<RetrievalQuery> bad{{"q3", "q", {"nope"}}};
    CHECK_THROWS_AS(eval_retrieval(bad, cands, gw), DataError);
    std::vector<RetrievalQuery> empty{{"q4", "q", {}}};
    CHECK_THROWS_AS(eval_retrieval(empty, cands, gw), DataError);
}

TEST_CASE("recast parsing needs five distinct statements") {
    auto s = parse_recast("(A) one\n(B) two\n(C) three\n(D) four\n(E) five\n");
    CHECK(s[1] == "two");
    CHECK_THROWS_AS(parse_recast("(A) one\n(B) two\n(C) three\n(D) four\n"), DataError);
    CHECK_THROWS_AS(parse_recast("(A) one\n(A) two\n(C) three\n(D) four\n(E) five"), DataError);
    CHECK_THROWS_AS(parse_recast("(A) one\n(B)  \n(C) three\n(D) four\n(E) five"), DataError);
}

TEST_CASE("argmax picks the lowest index on ties") {
    CHECK(argmax_first({0.1, 0.5, 0.5, 0.2, 0.5}) == 1);
    CHECK(argmax_first({0.3, 0.3, 0.3, 0.3, 0.3}) == 0);
    CHECK(argmax_first({0.1, 0.2, 0.3, 0.4, 0.9}) == 4);
}

TEST_CASE("video QA recasts, scores and picks the best statement") {
    VqaInstance q{"q1", "v", "what does the dog do", {"sit", "run", "jump", "bark", "sleep"}, 2};
    std::string completion = "(A) dog sits\n(B) dog runs\n(C) dog jumps\n(D) dog barks\n(E) dog sleeps\n";
    json fx = {{"generate", {{{"prompt", render_recast_prompt(q.question, q.choices)}, {"text", completion}}}},
               {"align",
                {align("v", "dog sits", 0.1), align("v", "dog runs", 0.6), align("v", "dog jumps", 0.6),
                 align("v", "dog barks", 0.2), align("v", "dog sleeps", 0.3)}}};
    auto gw = scripted(fx);
    std::map<std::string, VideoRef> videos{{"v", testing::video("v")}};
    auto rep = eval_vqa({q}, videos, gw);
    REQUIRE(rep.predictions.size() == 1);
    CHECK(rep.predictions[0].predicted == 1);
    CHECK(rep.metrics.at("accuracy") == 0.0);
    q.answer_index = 1;
    CHECK(eval_vqa({q}, videos, gw).metrics.at("accuracy") == 1.0);
    q.video_id = "missing";
    auto miss = eval_vqa({q}, videos, gw);
    CHECK(miss.evaluated == 0);
    CHECK(miss.excluded.size() == 1);
}

TEST_CASE("video QA instances validate their shape") {
    json j = {{"question_id", "q"}, {"video_id", "v"}, {"question", "x"}, {"choices", {"a", "b", "c", "d", "e"}},
              {"answer_index", 4}};
    CHECK(j.get<VqaInstance>().answer_index == 4);
    j["answer_index"] = 5;
    CHECK_THROWS_AS(j.get<VqaInstance>(), DataError);
    j["answer_index"] = 0;
    j["choices"] = {"a", "b"};
    CHECK_THROWS_AS(j.get<VqaInstance>(), DataError);
}

TEST_CASE("mock backend drives every evaluation end to end") {
    Gateway gw(std::make_shared<MockBackend>(5));
    std::vector<ContrastRecord> rs;
    for (int i = 0; i < 20; ++i) rs.push_back(testing::record("v" + std::to_string(i % 4), i));
    auto ent = eval_entailment(to_entailment_examples(rs), gw);
    CHECK(ent.metrics.at("roc_auc") >= 0.0);
    CHECK(ent.metrics.at("roc_auc") <= 1.0);
    CHECK(eval_nle(rs, gw).evaluated == 20);
    VqaInstance q{"q", "v0", "what happens", {"a x", "b y", "c z", "d w", "e v"}, 0};
    auto vqa = eval_vqa({q}, {{"v0", testing::video("v0")}}, gw);
    CHECK(vqa.evaluated == 1);
}
