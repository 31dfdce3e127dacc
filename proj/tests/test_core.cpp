#include "concap/core.hpp"
#include "concap/dataset.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <set>

using namespace concap;

TEST_CASE("misalignment tokens round-trip and the set is closed") {
    CHECK(kAllMisalignments.size() == 7);
    for (auto m : kAllMisalignments) CHECK(parse_misalignment(to_string(m)) == m);
    CHECK(to_string(MisalignmentType::event_order) == "event-order");
    CHECK_THROWS_AS(parse_misalignment("event_order"), DataError);
    CHECK_THROWS_AS(parse_misalignment("Object"), DataError);
    CHECK_THROWS_AS(parse_misalignment(""), DataError);
}

TEST_CASE("instance ids are deterministic and distinguish the variant") {
    auto a = make_instance_id("v1", "a dog runs", MisalignmentType::object);
    CHECK(a == make_instance_id("v1", "a dog runs", MisalignmentType::object));
    CHECK(a != make_instance_id("v1", "a dog runs", MisalignmentType::action));
    CHECK(a.size() == 16);
    // Normalization makes spacing and case irrelevant.
    CHECK(a == make_instance_id(" v1 ", "A  dog runs", MisalignmentType::object));
    CHECK_THROWS_AS(make_instance_id("", "x", MisalignmentType::object), PreconditionError);
    CHECK_THROWS_AS(make_instance_id("v", "  ", MisalignmentType::object), PreconditionError);
}

TEST_CASE("instance ids do not collide on 10,000 random triples") {
    std::mt19937_64 rng(7);
    std::set<std::tuple<std::string, std::string, MisalignmentType>> triples;
    std::set<std::string> ids;
    while (triples.size() < 10000) {
        auto vid = "v" + std::to_string(rng() % 500);
        auto cap = "caption " + std::to_string(rng() % 100000);
        auto m = kAllMisalignments[rng() % 7];
        if (triples.emplace(vid, cap, m).second) ids.insert(make_instance_id(vid, cap, m));
    }
    CHECK(ids.size() == triples.size());
}

namespace {
ContrastRecord sample_record(MisalignmentType m = MisalignmentType::object) {
    ContrastRecord r;
    r.video = testing::video("v1");
    r.caption = "a dog runs";
    r.contrast_caption = "a cat runs";
    r.nle = "a dog runs, not a cat";
    r.misalignment = m;
    r.instance_id = make_instance_id(r.video.video_id, r.caption, m);
    if (m != MisalignmentType::event_order) {
        r.source_span = "dog";
        r.target_span = "cat";
    }
    r.split = Split::val;
    r.filter_scores = {0.1, 0.9};
    return r;
}
}  // namespace

TEST_CASE("core types round-trip through JSON") {
    auto v = testing::video("v9", VideoSource::tempo);
    CHECK(json(v).get<VideoRef>() == v);

    CaptionInstance c{v, "a man waves", Split::test, 0.25, true};
    CHECK(json(c).get<CaptionInstance>() == c);
    CaptionInstance bare{v, "a man waves", Split::train, std::nullopt, std::nullopt};
    CHECK(json(bare).get<CaptionInstance>() == bare);

    auto r = sample_record();
    CHECK(json(r).get<ContrastRecord>() == r);
    auto e = sample_record(MisalignmentType::event_order);
    CHECK(json(e).get<ContrastRecord>() == e);

    for (const auto& ex : to_entailment_examples(r)) CHECK(json(ex).get<EntailmentExample>() == ex);

    AssignedCaption a{c, MisalignmentType::count};
    CHECK(json(a).get<AssignedCaption>() == a);
}

TEST_CASE("readers reject invariant violations") {
    auto j = json(sample_record());
    SECTION("unknown key") {
        j["extra"] = 1;
        CHECK_THROWS_AS(j.get<ContrastRecord>(), DataError);
    }
    SECTION("contrast equal to caption after normalization") {
        j["contrast_caption"] = "A Dog  runs";
        CHECK_THROWS_AS(j.get<ContrastRecord>(), DataError);
    }
    SECTION("spans missing for a non-event type") {
        j.erase("source_span");
        CHECK_THROWS_AS(j.get<ContrastRecord>(), DataError);
    }
    SECTION("spans present for event-order") {
        j["misalignment"] = "event-order";
        CHECK_THROWS_AS(j.get<ContrastRecord>(), DataError);
    }
    SECTION("filter score outside the unit interval") {
        j["filter_scores"]["nle_nli"] = 1.5;
        CHECK_THROWS_AS(j.get<ContrastRecord>(), DataError);
    }
    SECTION("empty frame list") {
        j["video"]["frames"] = json::array();
        CHECK_THROWS_AS(j.get<ContrastRecord>(), DataError);
    }
}

TEST_CASE("entailment example label and misalignment agree") {
    auto ex = to_entailment_examples(sample_record())[1];
    auto j = json(ex);
    CHECK(j["label"] == 0);
    j.erase("misalignment");
    CHECK_THROWS_AS(j.get<EntailmentExample>(), DataError);
    auto pos = json(to_entailment_examples(sample_record())[0]);
    pos["misalignment"] = "object";
    CHECK_THROWS_AS(pos.get<EntailmentExample>(), DataError);
    pos.erase("misalignment");
    pos["label"] = 2;
    CHECK_THROWS_AS(pos.get<EntailmentExample>(), DataError);
    pos["label"] = 1.0;
    CHECK_THROWS_AS(pos.get<EntailmentExample>(), DataError);
}

TEST_CASE("caption instances need a non-empty caption and unit a_vle") {
    auto j = json(CaptionInstance{testing::video("v"), "x", Split::train, 0.5, std::nullopt});
    j["caption"] = "   ";
    CHECK_THROWS_AS(j.get<CaptionInstance>(), DataError);
    j["caption"] = "ok";
    j["a_vle"] = -0.1;
    CHECK_THROWS_AS(j.get<CaptionInstance>(), DataError);
    j["a_vle"] = 0.2;
    j["split"] = "dev";
    CHECK_THROWS_AS(j.get<CaptionInstance>(), DataError);
}
