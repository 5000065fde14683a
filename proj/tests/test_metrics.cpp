#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "latte/metrics.hpp"
#include "oracles.hpp"

using namespace latte;

namespace {

RankingResult at_rank(std::size_t rank) {
    RankingResult r;
    r.mention_id = "m";
    r.rank_of_gold = rank;
    return r;
}

}  // namespace

TEST_CASE("precision at 1") {
    CHECK(precision_at_1({at_rank(1), at_rank(1)}) == 1.0);
    CHECK(precision_at_1({at_rank(1), at_rank(3)}) == 0.5);
    CHECK_THROWS_AS(precision_at_1({}), ValueError);
}

TEST_CASE("mean average precision") {
    CHECK(mean_average_precision({at_rank(1), at_rank(2)}) ==
          Catch::Approx(0.75));
    CHECK(mean_average_precision({at_rank(1), at_rank(1)}) == 1.0);
    CHECK_THROWS_AS(mean_average_precision({}), ValueError);
}

TEST_CASE("random fixtures match brute-force counting oracles") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> rank(1, 10);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<RankingResult> results;
        std::size_t hits = 0;
        double ap_sum = 0.0;
        for (int i = 0; i < 20; ++i) {
            const std::size_t r = rank(rng);
            results.push_back(at_rank(r));
            if (r == 1) ++hits;
            ap_sum += oracle::average_precision(r);
        }
        CHECK(precision_at_1(results) ==
              Catch::Approx(static_cast<double>(hits) / 20.0));
        CHECK(mean_average_precision(results) == Catch::Approx(ap_sum / 20.0));
    }
}

TEST_CASE("p@1 <= map <= 1 always") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> rank(1, 10);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<RankingResult> results;
        for (int i = 0; i < 15; ++i) results.push_back(at_rank(rank(rng)));
        const double p1 = precision_at_1(results);
        const double map = mean_average_precision(results);
        CHECK(p1 <= map);
        CHECK(map <= 1.0);
    }
}

TEST_CASE("ranking from scores: descending with id tie-break, gold checks") {
    auto r = RankingResult::from_scores(
        "m1", {{"E2", 0.5}, {"E1", 0.5}, {"E3", 0.9}}, "E2");
    // E3 first (0.9), then E1 before E2 on the tie
    CHECK(r.rank_of_gold == 3);

    CHECK_THROWS_AS(RankingResult::from_scores("m", {{"E1", 1.0}}, "E9"),
                    IntegrityError);
    CHECK_THROWS_AS(RankingResult::from_scores(
                        "m", {{"E1", 1.0}, {"E1", 0.2}}, "E1"),
                    IntegrityError);
}

TEST_CASE("metrics invariant under monotone score transforms") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::pair<std::string, double>> scored;
        for (int i = 0; i < 8; ++i)
            scored.emplace_back("E" + std::to_string(i), u(rng));
        auto transformed = scored;
        for (auto& [id, s] : transformed) s = std::exp(2.0 * s) + 1.0;
        auto a = RankingResult::from_scores("m", scored, "E3");
        auto b = RankingResult::from_scores("m", transformed, "E3");
        CHECK(a.rank_of_gold == b.rank_of_gold);
    }
}

TEST_CASE("report layout") {
    CHECK(metrics_report("dev", 0.88461, 0.92812) ==
          "P@1 dev 0.8846\nMAP dev 0.9281\n");
}
