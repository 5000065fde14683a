#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "latte/losses.hpp"
#include "oracles.hpp"

using namespace latte;

TEST_CASE("known type label is a uniform distribution over gold ids") {
    auto l = KnownTypeLabel::from_ids({1, 3}, 4);
    CHECK(l.target == std::vector<double>{0.0, 0.5, 0.0, 0.5});
    CHECK_THROWS_AS(KnownTypeLabel::from_ids({}, 4), ValueError);
    CHECK_THROWS_AS(KnownTypeLabel::from_ids({4}, 4), IntegrityError);
}

TEST_CASE("type loss values") {
    Graph g;
    // scores that softmax to ~one-hot on the gold type
    auto sharp = make_tensor({1, 3}, {50.0, 0.0, 0.0});
    auto l0 = type_loss(g, KnownTypeLabel::from_ids({0}, 3), sharp);
    CHECK(l0->value[0] == Catch::Approx(0.0).margin(1e-9));

    auto flat = make_tensor({1, 4}, {0.0, 0.0, 0.0, 0.0});
    auto l1 = type_loss(g, KnownTypeLabel::from_ids({2}, 4), flat);
    CHECK(l1->value[0] == Catch::Approx(std::log(4.0)).margin(1e-12));

    // y_hat = [0.25, 0.25, 0.5] via log-probability scores
    auto scores = make_tensor(
        {1, 3}, {std::log(0.25), std::log(0.25), std::log(0.5)});
    auto l2 = type_loss(g, KnownTypeLabel::from_ids({2}, 3), scores);
    CHECK(l2->value[0] == Catch::Approx(-std::log(0.5)).margin(1e-12));
}

TEST_CASE("ranking loss values") {
    Graph g;
    auto pos = make_scalar(2.0);
    CHECK(ranking_loss(g, pos, {make_scalar(0.5)}, 1.0)->value[0] == 0.0);
    CHECK(ranking_loss(g, make_scalar(0.2), {make_scalar(0.5)}, 1.0)
              ->value[0] == Catch::Approx(1.3));
    CHECK(ranking_loss(g, make_scalar(1.0),
                       {make_scalar(1.0), make_scalar(1.0)}, 1.0)
              ->value[0] == Catch::Approx(2.0));
    CHECK_THROWS_AS(ranking_loss(g, pos, {}, 1.0), ValueError);
}

TEST_CASE("ranking loss zero iff margin satisfied for all negatives") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double margin = 1.0;
    for (int rep = 0; rep < 50; ++rep) {
        const double rp = u(rng);
        std::vector<Tensor> negs;
        bool satisfied = true;
        for (int i = 0; i < 4; ++i) {
            const double rn = u(rng);
            negs.push_back(make_scalar(rn));
            satisfied = satisfied && rp >= rn + margin;
        }
        Graph g;
        const double loss =
            ranking_loss(g, make_scalar(rp), negs, margin)->value[0];
        CHECK(loss >= 0.0);
        CHECK((loss == 0.0) == satisfied);
    }
}

TEST_CASE("joint loss composition") {
    JointLossConfig cfg;
    cfg.margin = 1.0;
    auto label = KnownTypeLabel::from_ids({0}, 2);

    // lambda = 0 reduces to the ranking loss exactly
    {
        Graph g;
        cfg.type_weight = 0.0;
        auto b = joint_loss(g, make_scalar(0.2), {make_scalar(0.5)},
                            make_tensor({1, 2}, {0.0, 0.0}), label, {}, {},
                            cfg);
        CHECK(b.total->value[0] == Catch::Approx(1.3));
        CHECK(b.type_part == 0.0);
    }
    // all components zero -> zero
    {
        Graph g;
        cfg.type_weight = 1.0;
        auto b = joint_loss(g, make_scalar(5.0), {make_scalar(0.0)},
                            make_tensor({1, 2}, {50.0, 0.0}), label,
                            {make_tensor({1, 2}, {50.0, 0.0})}, {label}, cfg);
        CHECK(b.total->value[0] == Catch::Approx(0.0).margin(1e-9));
    }
    // lambda=1, rank=2, type terms 0.5 and 0.3 -> 2.8
    {
        Graph g;
        cfg.type_weight = 1.0;
        // craft type scores whose CE losses are exactly 0.5 and 0.3
        auto score_with_ce = [&](double ce) {
            const double p = std::exp(-ce);
            return make_tensor({1, 2},
                               {std::log(p), std::log(1.0 - p)});
        };
        auto b = joint_loss(g, make_scalar(0.0), {make_scalar(1.0)},
                            score_with_ce(0.5), label, {score_with_ce(0.3)},
                            {label}, cfg);
        CHECK(b.total->value[0] == Catch::Approx(2.0 + 0.5 + 0.3));
    }
}

TEST_CASE("kt-disabled joint loss routes no gradient into type scores") {
    JointLossConfig cfg;
    cfg.enable_known_type = false;
    auto label = KnownTypeLabel::from_ids({0}, 2);
    Graph g;
    auto scores = make_tensor({1, 2}, {0.3, -0.4}, true);
    auto pos = make_scalar(0.1, true);
    auto b = joint_loss(g, pos, {make_scalar(0.2)}, scores, label, {scores},
                        {label}, cfg);
    g.backward(b.total);
    scores->ensure_grad();
    for (double gv : scores->grad) CHECK(gv == 0.0);
}

TEST_CASE("joint loss gradient matches finite differences") {
    std::mt19937_64 rng(41);
    auto w = make_tensor({2, 3}, oracle::random_vec(6, rng), true);
    auto x_pos = make_tensor({1, 2}, oracle::random_vec(2, rng));
    auto x_neg = make_tensor({1, 2}, oracle::random_vec(2, rng));
    auto x_type = make_tensor({1, 2}, oracle::random_vec(2, rng));
    JointLossConfig cfg;
    auto label = KnownTypeLabel::from_ids({1}, 3);
    auto forward = [&](Graph& g) {
        auto r_pos = sum(g, matmul(g, x_pos, w));
        auto r_neg = sum(g, matmul(g, x_neg, w));
        auto tscores = matmul(g, x_type, w);
        auto b = joint_loss(g, r_pos, {r_neg}, tscores, label, {tscores},
                            {label}, cfg);
        return b.total;
    };
    auto rep = oracle::fd_check(forward, {w}, 1e-5, rng, 6);
    CHECK(rep.max_rel < 1e-4);
}
