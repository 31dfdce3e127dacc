#include "concap/config.hpp"
#include "concap/gateway.hpp"
#include "concap/lexicon.hpp"
#include "concap/mock_backend.hpp"
#include "concap/parallel.hpp"
#include "concap/scripted_backend.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <atomic>
#include <thread>

using namespace concap;

namespace {

// Delegates to a mock, optionally sleeping, failing, or returning junk.
class TestBackend : public Backend {
public:
    MockBackend inner{1};
    std::chrono::milliseconds delay{0};
    mutable std::atomic<int> failures_left{0};
    BackendFailure failure = BackendFailure::unreachable;
    mutable std::atomic<int> calls{0};
    double nli_override = -1;

    std::string identity() const override { return "test"; }
    void step() const {
        ++calls;
        if (delay.count()) std::this_thread::sleep_for(delay);
        if (failures_left.load() > 0) {
            --failures_left;
            throw BackendError(failure, "test", "induced");
        }
    }
    double score_frame_entailment(const FrameRef& f, const std::string& t) const override {
        step();
        return inner.score_frame_entailment(f, t);
    }
    double score_nli(const std::string& p, const std::string& h) const override {
        step();
        return nli_override >= -0.5 ? nli_override : inner.score_nli(p, h);
    }
    std::string generate(const std::string& p, const GenerationParams& g) const override {
        step();
        return inner.generate(p, g);
    }
    AlignmentLogits score_alignment(const VideoRef& v, const std::string& t) const override {
        step();
        return inner.score_alignment(v, t);
    }
    std::string generate_nle(const VideoRef& v, const std::string& c) const override {
        step();
        return inner.generate_nle(v, c);
    }
    bool judge_entailment(const std::string& p, const std::string& h) const override {
        step();
        return inner.judge_entailment(p, h);
    }
    EventClass classify_event_count(const std::string& t) const override {
        step();
        return inner.classify_event_count(t);
    }
    PosTags tag_pos(const std::string& t) const override {
        step();
        return inner.tag_pos(t);
    }
};

GatewayOptions fast(std::size_t cap = 8) {
    GatewayOptions o;
    o.max_in_flight = cap;
    o.initial_backoff = std::chrono::milliseconds(1);
    return o;
}

}  // namespace

TEST_CASE("mock backend is deterministic per seed") {
    MockBackend a(3), b(3), c(4);
    auto v = testing::video("v1");
    CHECK(a.score_nli("p", "h") == b.score_nli("p", "h"));
    CHECK(a.score_nli("p", "h") != c.score_nli("p", "h"));
    CHECK(a.score_alignment(v, "x").s_yes == b.score_alignment(v, "x").s_yes);
    auto l = a.score_alignment(v, "x");
    CHECK(l.s_yes + l.s_no == Catch::Approx(1.0));
    CHECK(a.generate("free prompt", {}) == b.generate("free prompt", {}));
    CHECK(a.identity() == "mock(seed=3)");
    for (int i = 0; i < 100; ++i) {
        double s = a.score_frame_entailment("f" + std::to_string(i), "t");
        CHECK((s >= 0 && s < 1));
    }
}

TEST_CASE("scripted backend answers listed requests and rejects others") {
    json fx = {{"nli", {{{"premise", "a"}, {"hypothesis", "b"}, {"score", 0.7}}}},
               {"generate", {{{"prompt", "hello"}, {"text", "world"}}}},
               {"events", {{{"text", "x then y"}, {"label", "multiple"}}}},
               {"pos", {{{"text", "red dog"}, {"tags", {"ADJ", "NOUN"}}}}},
               {"align", {{{"video_id", "v1"}, {"text", "t"}, {"s_yes", 2.0}, {"s_no", 1.0}}}}};
    ScriptedBackend s(fx);
    CHECK(s.size() == 5);
    CHECK(s.score_nli("a", "b") == 0.7);
    CHECK(s.generate("hello", {}) == "world");
    CHECK(s.classify_event_count("x then y") == EventClass::multiple);
    CHECK(s.tag_pos("red dog") == PosTags{PosTag::ADJ, PosTag::NOUN});
    CHECK(s.score_alignment(testing::video("v1"), "t").s_yes == 2.0);
    try {
        s.score_nli("a", "c");
        FAIL("expected unknown-key");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendFailure::unknown_key);
        CHECK(std::string(e.what()).find("a|c") != std::string::npos);
    }
}

TEST_CASE("scripted backend rejects malformed fixture documents") {
    CHECK_THROWS_AS(ScriptedBackend(json{{"bogus", json::array()}}), ConfigError);
    CHECK_THROWS_AS(ScriptedBackend(json{{"nli", {{{"premise", "a"}, {"score", 1}}}}}), ConfigError);
    json dup = {{"nli", {{{"premise", "a"}, {"hypothesis", "b"}, {"score", 0.1}},
                         {{"premise", "a"}, {"hypothesis", "b"}, {"score", 0.2}}}}};
    CHECK_THROWS_AS(ScriptedBackend(dup), ConfigError);
    json same = {{"nli", {{{"premise", "a"}, {"hypothesis", "b"}, {"score", 0.1}},
                          {{"premise", "a"}, {"hypothesis", "b"}, {"score", 0.1}}}}};
    CHECK(ScriptedBackend(same).size() == 1);
}

TEST_CASE("gateway never exceeds its in-flight cap") {
    for (std::size_t cap : {1u, 3u, 8u}) {
        auto be = std::make_shared<TestBackend>();
        be->delay = std::chrono::milliseconds(2);
        Gateway gw(be, fast(cap));
        auto out = parallel_map(48, 16, [&](std::size_t i) { return gw.score_nli("p" + std::to_string(i), "h"); });
        for (const auto& o : out) CHECK(o.ok());
        CHECK(gw.peak_in_flight() <= cap);
        CHECK(gw.calls() == 48);
    }
}

TEST_CASE("gateway retries only transport failures") {
    auto be = std::make_shared<TestBackend>();
    Gateway gw(be, fast());

    be->failures_left = 2;
    CHECK_NOTHROW(gw.score_nli("p", "h"));
    CHECK(be->calls == 3);

    be->calls = 0;
    be->failures_left = 3;
    CHECK_THROWS_AS(gw.score_nli("p", "h"), BackendError);
    CHECK(be->calls == 3);

    be->calls = 0;
    be->failures_left = 1;
    be->failure = BackendFailure::unknown_key;
    CHECK_THROWS_AS(gw.score_nli("p", "h"), BackendError);
    CHECK(be->calls == 1);
}

TEST_CASE("gateway validates preconditions and responses") {
    auto be = std::make_shared<TestBackend>();
    Gateway gw(be, fast());
    CHECK_THROWS_AS(gw.score_nli("", "h"), PreconditionError);
    CHECK_THROWS_AS(gw.score_frame_entailment("", "t"), PreconditionError);
    VideoRef empty{"v", VideoSource::msrvtt, {}, 1};
    CHECK_THROWS_AS(gw.score_alignment(empty, "t"), PreconditionError);
    GenerationParams bad;
    bad.top_p = 0;
    CHECK_THROWS_AS(gw.generate("p", bad), ConfigError);
    CHECK(be->calls == 0);

    be->nli_override = 1.2;
    try {
        gw.score_nli("p", "h");
        FAIL("expected invalid response");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendFailure::invalid_response);
    }
}

TEST_CASE("gateway rejects out-of-range caps") {
    auto be = std::make_shared<TestBackend>();
    CHECK_THROWS_AS(Gateway(be, fast(0)), ConfigError);
    CHECK_THROWS_AS(Gateway(be, fast(Gateway::kMaxInFlight + 1)), ConfigError);
    CHECK_THROWS_AS(Gateway(nullptr, fast()), ConfigError);
}

TEST_CASE("gateway answers POS locally unless told otherwise") {
    auto be = std::make_shared<TestBackend>();
    Gateway local(be, fast());
    CHECK(local.tag_pos("a small dog runs") == PosTags{PosTag::ADJ, PosTag::NOUN, PosTag::VERB});
    CHECK(be->calls == 0);
    auto o = fast();
    o.lexicon_pos = false;
    Gateway remote(be, o);
    remote.tag_pos("a small dog runs");
    CHECK(be->calls == 1);
    CHECK(local.identity() == "test+lexicon-pos");
    CHECK(remote.identity() == "test");
}

TEST_CASE("lexicon tags and event heuristics") {
    CHECK(lexicon::tag("a dog is running") == PosTags{PosTag::NOUN, PosTag::VERB});
    CHECK(lexicon::tag("a red ball") == PosTags{PosTag::ADJ, PosTag::NOUN});
    CHECK(lexicon::tag("the the the").empty());
    CHECK(lexicon::describes_multiple_events("a man opens the door and then walks out"));
    CHECK(lexicon::describes_multiple_events("she laughs after the dog jumps"));
    CHECK_FALSE(lexicon::describes_multiple_events("a dog"));
}

TEST_CASE("routing backend sends each endpoint to its override") {
    json fx = {{"nli", {{{"premise", "a"}, {"hypothesis", "b"}, {"score", 0.25}}}}};
    auto scripted = std::make_shared<ScriptedBackend>(fx);
    auto mock = std::make_shared<MockBackend>(5);
    RoutingBackend r(mock, {{wire::Endpoint::nli, scripted}});
    CHECK(r.score_nli("a", "b") == 0.25);
    CHECK(r.score_frame_entailment("f", "t") == mock->score_frame_entailment("f", "t"));
    CHECK(r.identity() == "mock(seed=5);nli=scripted(inline)");
}
