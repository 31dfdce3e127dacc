#include "concap/metrics.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace concap;

namespace {
double brute_auc(const std::vector<ScoredLabel>& s) {
    double num = 0, pairs = 0;
    for (const auto& p : s)
        for (const auto& n : s)
            if (p.label == 1 && n.label == 0) {
                pairs += 1;
                num += p.score > n.score ? 1.0 : (p.score == n.score ? 0.5 : 0.0);
            }
    return num / pairs;
}
}  // namespace

TEST_CASE("AUC of small hand cases") {
    CHECK(roc_auc(std::vector<ScoredLabel>{{0.9, 1}, {0.1, 0}}) == 1.0);
    CHECK(roc_auc(std::vector<ScoredLabel>{{0.1, 1}, {0.9, 0}}) == 0.0);
    CHECK(roc_auc(std::vector<ScoredLabel>{{0.5, 1}, {0.5, 0}}) == 0.5);
    CHECK(roc_auc(std::vector<ScoredLabel>{{0.8, 1}, {0.4, 1}, {0.6, 0}, {0.2, 0}}) == 0.75);
}

TEST_CASE("AUC matches the pairwise definition with ties") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 300; ++t) {
        std::size_t n = 2 + rng() % 40;
        std::vector<ScoredLabel> s(n);
        for (auto& x : s) x = {static_cast<double>(rng() % 7) / 6.0, static_cast<int>(rng() % 2)};
        s[0].label = 1;
        s[1].label = 0;
        CHECK(roc_auc(s) == Catch::Approx(brute_auc(s)).margin(1e-12));
    }
}

TEST_CASE("AUC rejects degenerate and malformed input") {
    CHECK_THROWS_AS(roc_auc(std::vector<ScoredLabel>{{0.1, 1}, {0.2, 1}}), DegenerateLabelsError);
    CHECK_THROWS_AS(roc_auc(std::vector<ScoredLabel>{}), DegenerateLabelsError);
    CHECK_THROWS_AS(roc_auc(std::vector<ScoredLabel>{{0.1, 2}, {0.2, 0}}), PreconditionError);
    CHECK_THROWS_AS(roc_auc(std::vector<ScoredLabel>{{std::nan(""), 1}, {0.2, 0}}), PreconditionError);
}

TEST_CASE("AUC laws: complement and monotone transforms") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        std::vector<ScoredLabel> s(20);
        for (auto& x : s) x = {u(rng), static_cast<int>(rng() % 2)};
        s[0].label = 1;
        s[1].label = 0;
        auto flipped = s, warped = s;
        for (auto& x : flipped) x.label = 1 - x.label;
        for (auto& x : warped) x.score = std::exp(3 * x.score) - 7;
        CHECK(roc_auc(flipped) == Catch::Approx(1 - roc_auc(s)).margin(1e-12));
        CHECK(roc_auc(warped) == Catch::Approx(roc_auc(s)).margin(1e-12));
    }
}

TEST_CASE("p_yes normalizes and is symmetric") {
    CHECK(p_yes({3, 1}) == 0.75);
    CHECK(p_yes({3, 1}) + p_yes({1, 3}) == 1.0);
    CHECK(p_yes({0, 2}) == 0.0);
    CHECK_THROWS_AS(p_yes({0, 0}), DataError);
}

TEST_CASE("average precision by hand") {
    std::vector<std::string> r{"a", "b", "c", "d"};
    CHECK(average_precision(r, {"a", "c"}) == Catch::Approx(5.0 / 6.0).margin(1e-12));
    CHECK(average_precision(r, {"a"}) == 1.0);
    CHECK(average_precision(r, {"d"}) == 0.25);
    CHECK(average_precision(r, {"a", "b", "c", "d"}) == 1.0);
    CHECK_THROWS_AS(average_precision(r, {}), DataError);
    CHECK_THROWS_AS(average_precision(r, {"z"}), PreconditionError);
    CHECK_THROWS_AS(average_precision(std::vector<std::string>{"a", "a"}, {"a"}), PreconditionError);
}

TEST_CASE("per-type AUC restricts negatives and pairs positives") {
    auto ex = [](std::string id, int label, std::optional<MisalignmentType> m) {
        return EntailmentExample{std::move(id), testing::video("v"), "t", label, m};
    };
    std::vector<EntailmentExample> e{
        ex("a", 1, std::nullopt), ex("a", 0, MisalignmentType::object),
        ex("b", 1, std::nullopt), ex("b", 0, MisalignmentType::count),
        ex("c", 1, std::nullopt), ex("c", 0, MisalignmentType::hallucination),
    };
    e.push_back(ex("d", 0, MisalignmentType::action));  // no paired positive
    std::vector<double> s{0.9, 0.1, 0.2, 0.8, 0.6, 0.6, 0.5};
    auto paired = roc_auc_by_misalignment(e, s);
    CHECK(paired.at(MisalignmentType::object) == 1.0);
    CHECK(paired.at(MisalignmentType::count) == 0.0);
    CHECK(paired.at(MisalignmentType::hallucination) == 0.5);
    CHECK_FALSE(paired.contains(MisalignmentType::action));
    auto all = roc_auc_by_misalignment(e, s, PerTypePositives::all);
    CHECK(all.at(MisalignmentType::object) == 1.0);
    CHECK(all.at(MisalignmentType::count) == Catch::Approx(1.0 / 3.0));
    CHECK(all.at(MisalignmentType::action) == Catch::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(roc_auc_by_misalignment(e, std::vector<double>{0.1}), PreconditionError);
}
