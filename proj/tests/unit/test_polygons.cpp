#include "wachlab/repdata.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace wachlab;

TEST_CASE("newton_from_valuations") {
    SECTION("X^2 - 3X + 9 over Q_3: slopes (1,1)") {
        Polygon p = newton_from_valuations({{0, 2}, {1, 1}, {2, 0}});
        REQUIRE(p.slopes.size() == 1);
        REQUIRE(p.slopes[0] == std::make_pair(Rat(1), 2LL));
    }
    SECTION("unit coefficients: slopes (0,0)") {
        Polygon p = newton_from_valuations({{0, 0}, {1, 0}, {2, 0}});
        REQUIRE(p.slopes[0] == std::make_pair(Rat(0), 2LL));
    }
    SECTION("X - p^k: slope (k)") {
        Polygon p = newton_from_valuations({{0, 5}, {1, 0}});
        REQUIRE(p.slopes[0] == std::make_pair(Rat(5), 1LL));
    }
    SECTION("empty input / unknown endpoints error") {
        REQUIRE_THROWS_AS(newton_from_valuations({}), input_error);
        REQUIRE_THROWS_AS(newton_from_valuations({{0, 8, true}, {1, 0}}), precision_error);
    }
}

TEST_CASE("matrix_hodge") {
    auto ctx = make_field(3, 1, 1, 8);
    SECTION("diagonal p-powers") {
        Mat<UnramElem> m(3, 3, ctx->zero());
        m.at(0, 0) = ctx->one().times_pk(2);
        m.at(1, 1) = ctx->one().times_pk(1);
        m.at(2, 2) = ctx->one();
        Polygon p = matrix_hodge(m);
        REQUIRE(p.expanded() == std::vector<Rat>{Rat(2), Rat(1), Rat(0)});
    }
    SECTION("[[p,1],[0,1]] reduces to Diag(1,p): (1,0)") {
        Mat<UnramElem> m(2, 2, ctx->zero());
        m.at(0, 0) = ctx->from_scalar(3);
        m.at(0, 1) = ctx->one();
        m.at(1, 1) = ctx->one();
        Polygon p = matrix_hodge(m);
        REQUIRE(p.expanded() == std::vector<Rat>{Rat(1), Rat(0)});
    }
    SECTION("unit matrices give (0,...,0), and GL-invariance") {
        std::mt19937_64 rng(31);
        Mat<UnramElem> g = random_gl(ctx, 2, rng);
        REQUIRE(matrix_hodge(g).expanded() == std::vector<Rat>{Rat(0), Rat(0)});
        Mat<UnramElem> m(2, 2, ctx->zero());
        m.at(0, 0) = ctx->from_scalar(9);
        m.at(0, 1) = ctx->from_scalar(3);
        m.at(1, 1) = ctx->from_scalar(3);
        Polygon base = matrix_hodge(m);
        for (int i = 0; i < 5; ++i) {
            Mat<UnramElem> l = random_gl(ctx, 2, rng), r = random_gl(ctx, 2, rng);
            REQUIRE(matrix_hodge(l * m * r).expanded() == base.expanded());
        }
    }
    SECTION("precision exhaustion") {
        Mat<UnramElem> m(2, 2, ctx->zero());
        m.at(0, 0) = ctx->one();
        REQUIRE_THROWS_AS(matrix_hodge(m), precision_error);
    }
}

TEST_CASE("sigma_np and t-invariants") {
    SECTION("rank-1: single slope (sum k_j)/a") {
        auto ctx = make_field(3, 2, 2, 8);
        RepSpec s;
        s.ctx = ctx;
        s.d = 1;
        s.k.k = {{3}, {1}};
        Mat<UnramElem> one(1, 1, ctx->zero());
        one.at(0, 0) = ctx->one();
        s.A = {one, one};
        Polygon np = sigma_np(s);
        REQUIRE(np.expanded() == std::vector<Rat>{Rat(2)});
    }
    SECTION("p=3, a=2, k=((1,0),(1,0)), A_j=[[0,-1],[1,0]]") {
        auto ctx = make_field(3, 2, 2, 8);
        RepSpec s;
        s.ctx = ctx;
        s.d = 2;
        s.k.k = {{1, 0}, {1, 0}};
        Mat<UnramElem> A(2, 2, ctx->zero());
        A.at(0, 1) = -ctx->one();
        A.at(1, 0) = ctx->one();
        s.A = {A, A};
        // P_{(0)} = Diag(-3,-3): NP slopes (1,1); sigma-NP divides by a
        Mat<UnramElem> P = phi_power(s, 0);
        REQUIRE(P.at(0, 0) == ctx->from_scalar(-3));
        REQUIRE(P.at(1, 1) == ctx->from_scalar(-3));
        REQUIRE(P.at(0, 1).is_zero());
        Polygon np = sigma_np(s);
        REQUIRE(np.expanded() == std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
        auto [tH, tN] = t_invariants(s);
        REQUIRE(tH == Rat(1));
        REQUIRE(tN == Rat(1));
        // endpoint identity: sum of sigma-NP slopes = t_N
        REQUIRE(np.total() == tN);
    }
    SECTION("t_H = t_N = 0 for k = 0, and t_H = t_N on random unit specs") {
        std::mt19937_64 rng(41);
        auto ctx = make_field(5, 2, 2, 8);
        RepSpec z = random_spec2(ctx, 0, rng);
        auto [tH0, tN0] = t_invariants(z);
        REQUIRE(tH0 == Rat(0));
        REQUIRE(tN0 == Rat(0));
        for (int i = 0; i < 10; ++i) {
            RepSpec s = random_spec2(ctx, 4, rng);
            auto [tH, tN] = t_invariants(s);
            REQUIRE(tH == tN);
            // NP above HP with equal endpoints (weak admissibility)
            Polygon np = sigma_np(s);
            Polygon hp = polygon_from_vals(s.k.sigma_invariant());
            REQUIRE(np_above_hp(np, hp));
        }
    }
}

TEST_CASE("polygon behavior under sums and tensors") {
    std::mt19937_64 rng(43);
    auto ctx = make_field(3, 2, 2, 14);  // room for the summed tensor weights
    RepSpec s1 = random_spec2(ctx, 2, rng);
    // rank-1 character
    RepSpec ch;
    ch.ctx = ctx;
    ch.d = 1;
    ch.k.k = {{1}, {2}};
    Mat<UnramElem> u(1, 1, ctx->zero());
    u.at(0, 0) = random_unit(ctx, rng);
    Mat<UnramElem> u2(1, 1, ctx->zero());
    u2.at(0, 0) = random_unit(ctx, rng);
    ch.A = {u, u2};
    SECTION("direct sum unions the sigma-NP slope multisets") {
        RepSpec sum = direct_sum(s1, ch);
        auto all = sigma_np(sum).expanded();
        auto e1 = sigma_np(s1).expanded();
        auto e2 = sigma_np(ch).expanded();
        e1.insert(e1.end(), e2.begin(), e2.end());
        std::sort(e1.begin(), e1.end(), [](const Rat& x, const Rat& y) { return y < x; });
        REQUIRE(all == e1);
    }
    SECTION("tensor adds slopes pairwise") {
        RepSpec prod = tensor(s1, ch);
        auto all = sigma_np(prod).expanded();
        auto e1 = sigma_np(s1).expanded();
        Rat shift = sigma_np(ch).expanded()[0];
        std::vector<Rat> expect;
        for (const auto& x : e1) expect.push_back(x + shift);
        std::sort(expect.begin(), expect.end(), [](const Rat& x, const Rat& y) { return y < x; });
        REQUIRE(all == expect);
        // endpoint additivity of t_N
        REQUIRE(t_invariants(prod).second == t_invariants(s1).second * Rat(1) + Rat(2) * sigma_np(ch).total() * Rat(1));
    }
}
