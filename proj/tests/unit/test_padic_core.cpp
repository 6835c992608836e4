#include "wachlab/field.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace wachlab;

TEST_CASE("make_field deterministic modulus and frobenius") {
    SECTION("p=3 f=1: sigma is the identity") {
        auto ctx = make_field(3, 1, 1, 8);
        REQUIRE(ctx->modulus.size() == 1);
        UnramElem e = ctx->from_scalar(5);
        REQUIRE(e.frobenius(1) == e);
    }
    SECTION("p=3 f=2: modulus x^2+1, frob x -> -x") {
        auto ctx = make_field(3, 2, 2, 4);
        REQUIRE(ctx->modulus[0] == 1);
        REQUIRE(ctx->modulus[1] == 0);
        UnramElem x = ctx->gen();
        UnramElem fx = x.frobenius(1);
        REQUIRE(fx == -x);
        // (-x)^2 + 1 == 0 and -x == x^3 mod 3
        REQUIRE((fx * fx + ctx->one()).is_zero());
        UnramElem x3 = x * x * x;
        REQUIRE(mod_reduce(fx.c[1] - x3.c[1], 3) == 0);
    }
    SECTION("p must be an odd prime") {
        REQUIRE_THROWS_AS(make_field(2, 1, 1, 4), input_error);
        REQUIRE_THROWS_AS(make_field(9, 1, 1, 4), input_error);
        REQUIRE_THROWS_AS(make_field(3, 2, 3, 4), input_error);  // a does not divide f
    }
}

TEST_CASE("valuation") {
    auto ctx = make_field(3, 1, 1, 8);
    REQUIRE(ctx->from_scalar(3).valuation() == 1);
    REQUIRE(ctx->one().valuation() == 0);
    REQUIRE(ctx->zero().valuation() == 8);  // ">= N"
    auto ctx2 = make_field(3, 2, 2, 4);
    UnramElem e = ctx2->gen().times_pk(2) + ctx2->from_scalar(27);
    REQUIRE(e.valuation() == 2);
}

TEST_CASE("frobenius is a ring automorphism with sigma^f = id") {
    auto ctx = make_field(5, 2, 2, 6);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 25; ++i) {
        UnramElem a = random_elem(ctx, rng), b = random_elem(ctx, rng);
        REQUIRE((a * b).frobenius(1) == a.frobenius(1) * b.frobenius(1));
        REQUIRE((a + b).frobenius(1) == a.frobenius(1) + b.frobenius(1));
        REQUIRE(a.frobenius(ctx->f) == a);
        // sigma(e) == e^p mod p
        UnramElem d = a.frobenius(1) - a.pow(ctx->p);
        REQUIRE((d.is_zero() || d.valuation() >= 1));
    }
    // scalars are fixed
    UnramElem c = ctx->from_scalar(17);
    REQUIRE(c.frobenius(1) == c);
}

TEST_CASE("unit inversion and valuation additivity") {
    auto ctx = make_field(7, 3, 3, 5);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        UnramElem u = random_unit(ctx, rng);
        REQUIRE((u.invert() * u) == ctx->one());
    }
    REQUIRE_THROWS_AS(ctx->from_scalar(7).invert(), math_error);
    for (int i = 0; i < 20; ++i) {
        UnramElem a = random_elem(ctx, rng), b = random_elem(ctx, rng);
        int va = a.valuation(), vb = b.valuation();
        if (va + vb < ctx->N) REQUIRE((a * b).valuation() == va + vb);
    }
}

TEST_CASE("precision reduction is a ring map") {
    auto ctx = make_field(3, 2, 2, 8);
    auto low = ctx->with_precision(3);
    std::mt19937_64 rng(3);
    UnramElem a = random_elem(ctx, rng), b = random_elem(ctx, rng);
    REQUIRE((a * b).reduced_to(low) == a.reduced_to(low) * b.reduced_to(low));
    REQUIRE(a.frobenius(1).reduced_to(low) == a.reduced_to(low).frobenius(1));
}
