#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "latte/adam.hpp"
#include "latte/tensor.hpp"
#include "oracles.hpp"

using namespace latte;

TEST_CASE("matmul identity and projection") {
    Graph g;
    auto eye = make_tensor({2, 2}, {1, 0, 0, 1});
    auto a = make_tensor({2, 2}, {1, 2, 3, 4});
    auto out = matmul(g, eye, a);
    CHECK(out->value == std::vector<double>{1, 2, 3, 4});

    auto proj = make_tensor({2, 2}, {1, 0, 0, 0});
    auto v = make_tensor({2, 1}, {5, 7});
    CHECK(matmul(g, proj, v)->value == std::vector<double>{5, 0});
}

TEST_CASE("matmul matches triple-loop oracle") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        auto av = oracle::random_vec(12, rng);
        auto bv = oracle::random_vec(8, rng);
        Graph g;
        auto out = matmul(g, make_tensor({3, 4}, av), make_tensor({4, 2}, bv));
        auto ref = oracle::matmul(av, bv, 3, 4, 2);
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(out->value[i] == Catch::Approx(ref[i]).margin(1e-12));
    }
}

TEST_CASE("matmul shape mismatch names both shapes") {
    Graph g;
    auto a = make_tensor({2, 3}, std::vector<double>(6, 0.0));
    auto b = make_tensor({2, 2}, std::vector<double>(4, 0.0));
    CHECK_THROWS_MATCHES(matmul(g, a, b), ShapeError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("[2x3]") &&
                             Catch::Matchers::ContainsSubstring("[2x2]")));
}

TEST_CASE("masked softmax basics") {
    Graph g;
    auto sym = masked_softmax(g, make_tensor({1, 2}, {0, 0}), {1, 1});
    CHECK(sym->value[0] == Catch::Approx(0.5));
    CHECK(sym->value[1] == Catch::Approx(0.5));

    auto single = masked_softmax(g, make_tensor({1, 2}, {1e6, 0}), {1, 0});
    CHECK(single->value[0] == 1.0);
    CHECK(single->value[1] == 0.0);

    auto ref = oracle::softmax({1, 2, 3});
    auto out = masked_softmax(g, make_tensor({1, 3}, {1, 2, 3}), {1, 1, 1});
    for (int i = 0; i < 3; ++i)
        CHECK(out->value[i] == Catch::Approx(ref[i]).margin(1e-12));

    CHECK_THROWS_AS(
        masked_softmax(g, make_tensor({1, 2}, {0, 0}), {0, 0}), ValueError);
}

TEST_CASE("masked softmax rows sum to one, masked entries exactly zero") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t rows = 1 + rep % 4, cols = 2 + rep % 5;
        auto xv = oracle::random_vec(rows * cols, rng, -10.0, 10.0);
        std::vector<std::uint8_t> mask(rows * cols, 0);
        std::uniform_int_distribution<int> coin(0, 1);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c)
                mask[r * cols + c] = static_cast<std::uint8_t>(coin(rng));
            mask[r * cols + rep % cols] = 1;  // keep one live entry per row
        }
        Graph g;
        auto out = masked_softmax(g, make_tensor({rows, cols}, xv), mask);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                if (!mask[r * cols + c])
                    CHECK(out->value[r * cols + c] == 0.0);
                else
                    CHECK(out->value[r * cols + c] >= 0.0);
                s += out->value[r * cols + c];
            }
            CHECK(s == Catch::Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("elementwise ops") {
    Graph g;
    CHECK(relu(g, make_tensor({3}, {-1, 0, 2}))->value ==
          std::vector<double>{0, 0, 2});
    CHECK(mul(g, make_tensor({2}, {1, 2}), make_tensor({2}, {3, 4}))->value ==
          std::vector<double>{3, 8});
    auto cat = concat(g, {make_tensor({2}, {1, 2}), make_tensor({1}, {3})}, 0);
    CHECK(cat->value == std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(
        add(g, make_tensor({2, 2}, {1, 2, 3, 4}), make_tensor({3}, {1, 2, 3})),
        ShapeError);
}

TEST_CASE("cosine values and errors") {
    Graph g;
    auto a = make_tensor({3}, {1, 2, 3});
    CHECK(cosine(g, a, a)->value[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(cosine(g, make_tensor({2}, {1, 0}), make_tensor({2}, {0, 1}))
              ->value[0] == Catch::Approx(0.0).margin(1e-12));
    auto b = make_tensor({3}, {4, 5, 6});
    CHECK(cosine(g, a, b)->value[0] ==
          Catch::Approx(32.0 / (std::sqrt(14.0) * std::sqrt(77.0)))
              .margin(1e-9));
    CHECK_THROWS_AS(cosine(g, make_tensor({3}, {0, 0, 0}), a), ValueError);
}

TEST_CASE("cosine stays in [-1, 1] on random inputs") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        auto av = oracle::random_vec(4, rng, -100.0, 100.0);
        auto bv = oracle::random_vec(4, rng, -100.0, 100.0);
        Graph g;
        const double c =
            cosine(g, make_tensor({4}, av), make_tensor({4}, bv))->value[0];
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(c == Catch::Approx(oracle::cosine(av, bv)).margin(1e-12));
    }
}

TEST_CASE("backward on sum of squares") {
    Graph g;
    auto w = make_tensor({2}, {1, -2}, true);
    auto loss = sum(g, mul(g, w, w));
    g.backward(loss);
    CHECK(w->grad[0] == Catch::Approx(2.0));
    CHECK(w->grad[1] == Catch::Approx(-4.0));
}

TEST_CASE("backward of self-cosine is zero") {
    Graph g;
    auto a = make_tensor({3}, {0.3, -1.2, 2.0}, true);
    auto loss = cosine(g, a, a);
    g.backward(loss);
    for (double gv : a->grad) CHECK(gv == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("backward requires scalar loss") {
    Graph g;
    auto w = make_tensor({2}, {1, 2}, true);
    auto y = mul(g, w, w);
    CHECK_THROWS_AS(g.backward(y), ValueError);
}

TEST_CASE("backward is deterministic across repeated runs") {
    std::mt19937_64 rng(17);
    auto wv = oracle::random_vec(6, rng);
    auto xv = oracle::random_vec(6, rng);
    auto run = [&]() {
        auto w = make_tensor({2, 3}, wv, true);
        auto x = make_tensor({3, 2}, xv);
        Graph g;
        auto loss = sum(g, relu(g, matmul(g, w, x)));
        g.backward(loss);
        return w->grad;
    };
    CHECK(run() == run());
}

TEST_CASE("composite graph gradients match finite differences") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        auto w1 = make_tensor({3, 4}, oracle::random_vec(12, rng), true);
        auto w2 = make_tensor({4, 2}, oracle::random_vec(8, rng), true);
        auto x = make_tensor({2, 3}, oracle::random_vec(6, rng));
        auto forward = [&](Graph& g) {
            auto h = tanh_op(g, matmul(g, x, w1));
            auto sm = softmax(g, matmul(g, h, w2));
            return sum(g, mul(g, sm, sm));
        };
        auto rep_out =
            oracle::fd_check(forward, {w1, w2}, 1e-5, rng, 12);
        CHECK(rep_out.max_rel < 1e-4);
    }
}

TEST_CASE("non-finite forward values raise") {
    Graph g;
    auto big = make_tensor({1}, {1e308});
    CHECK_THROWS_AS(mul(g, big, big), NumericError);
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    auto p = make_tensor({3}, {1, 2, 3}, true);
    Adam opt({p}, 0.1);
    opt.zero_grad();
    opt.step();
    CHECK(p->value == std::vector<double>{1, 2, 3});
}

TEST_CASE("adam first step moves by about lr") {
    auto p = make_scalar(1.0, true);
    Adam opt({p}, 0.1);
    p->ensure_grad();
    p->grad[0] = 1.0;
    opt.step();
    CHECK(p->value[0] == Catch::Approx(0.9).margin(1e-6));
}

TEST_CASE("adam descends a convex quadratic monotonically") {
    auto p = make_scalar(3.0, true);
    Adam opt({p}, 0.05);
    double prev = p->value[0] * p->value[0];
    for (int step = 0; step < 2; ++step) {
        opt.zero_grad();
        p->ensure_grad();
        p->grad[0] = 2.0 * p->value[0];
        opt.step();
        const double now = p->value[0] * p->value[0];
        CHECK(now < prev);
        prev = now;
    }
}

TEST_CASE("adam shape mismatch between param and grad") {
    auto p = make_tensor({2}, {1, 2}, true);
    Adam opt({p}, 0.1);
    p->grad = {1.0};  // wrong length
    CHECK_THROWS_AS(opt.step(), ShapeError);
}
