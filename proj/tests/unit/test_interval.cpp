#include <doctest.h>

#include <funcdec/error.hpp>
#include <funcdec/interval.hpp>

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace funcdec;

namespace {

bool near(const Interval& got, double lo, double hi, double eps = 1e-8) {
    return std::abs(got.lo - lo) <= eps && std::abs(got.hi - hi) <= eps;
}

} // namespace

TEST_CASE("interval invariants") {
    CHECK_THROWS_AS(Interval(2.0, 1.0), DomainError);
    CHECK_THROWS_AS(Interval(0.0, INFINITY), DomainError);
    const Interval a(-1.0, 3.0);
    CHECK(a.width() == 4.0);
    CHECK(a.mid() == 1.0);
    CHECK(a.contains(3.0));
    CHECK(!a.contains(3.5));
    CHECK(hull(Interval(0, 1), Interval(3, 4)) == Interval(0, 4));
}

TEST_CASE("natural extension examples") {
    CHECK(near(interval_apply(Prim::Sq, Interval(-1, 2)), 0, 4));
    CHECK(near(interval_apply(Prim::Sin, Interval(0, std::numbers::pi)), 0, 1));
    CHECK(near(interval_apply(Prim::HardSig, Interval(-3, 1)), 0, 0.7));
    CHECK(near(interval_apply(Prim::Cos, Interval(-1, 1)), std::cos(1.0), 1));
    CHECK(near(interval_apply(Prim::Abs, Interval(-2, 1)), 0, 2));
    CHECK(near(interval_apply(Prim::Step, Interval(-2, 1)), 0, 1));
    CHECK(near(interval_apply(Prim::Step, Interval(0, 1)), 1, 1));
    const Interval ab[] = {Interval(-1, 2), Interval(-3, 1)};
    CHECK(near(interval_apply(Prim::Mul, ab), -6, 3));
}

TEST_CASE("domain violations") {
    CHECK_THROWS_AS(interval_apply(Prim::Log, Interval(-1, 1)), DomainError);
    CHECK_THROWS_AS(interval_apply(Prim::Sqrt, Interval(-1, 1)), DomainError);
    const Interval ab[] = {Interval(1, 2), Interval(-1, 1)};
    CHECK_THROWS_AS(interval_apply(Prim::Div, ab), DomainError);
    const auto fd = decompose_dedup(parse("sin(x)+log(x)"), 1);
    const Interval dom[] = {Interval(-1, 1)};
    try {
        propagate(fd, dom);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        REQUIRE(e.observable().has_value());
        CHECK(fd.observables[*e.observable()].op == Prim::Log);
    }
}

TEST_CASE("propagate examples") {
    const auto fd7 = decompose_dedup(parse("sin(x)+sin(x)^2"), 1);
    const Interval dom[] = {Interval(-std::numbers::pi, std::numbers::pi)};
    const auto iv = propagate(fd7, dom);
    CHECK(near(iv[1], -1, 1));
    CHECK(near(iv[2], 0, 1));
    CHECK(near(iv[3], -1, 2));
    const auto id = decompose_basic(parse("x"), 1);
    const Interval ab[] = {Interval(-0.5, 2.5)};
    CHECK(propagate(id, ab)[0] == Interval(-0.5, 2.5));
    const auto sum = decompose_basic(parse("x+y"), 2);
    const Interval unit[] = {Interval(0, 1), Interval(0, 1)};
    CHECK(near(propagate(sum, unit)[2], 0, 2));
}

TEST_CASE("inflation widens but never leaves the codomain") {
    const auto fd = decompose_dedup(parse("sin(x)"), 1);
    const Interval dom[] = {Interval(-4, 4)};
    const auto iv = propagate(fd, dom, 1e-3);
    CHECK(iv[1].lo >= -1.0);
    CHECK(iv[1].hi <= 1.0);
    const auto fd2 = decompose_dedup(parse("3*x"), 1);
    const auto iv2 = propagate(fd2, dom, 1e-3);
    CHECK(iv2[1].hi > 12.0);
}

TEST_CASE("property: propagated intervals contain sampled values and grow with the domain") {
    oracle::ExprGenerator gen({"x", "y"}, 11);
    std::mt19937_64 rng(12);
    for (int e = 0; e < 200; ++e) {
        const auto src = gen.next(1 + e % 5);
        const std::vector<std::string> vars = {"x", "y"};
        const auto fd = decompose_dedup(parse(src), vars);
        const Interval dom[] = {Interval(-1.5, 0.5), Interval(-0.25, 2.0)};
        const Interval wide[] = {Interval(-2.0, 1.0), Interval(-0.5, 2.0)};
        const auto iv = propagate(fd, dom);
        const auto iw = propagate(fd, wide);
        INFO(src);
        for (std::size_t j = 0; j < fd.size(); ++j) CHECK(iw[j].contains(iv[j]));
        for (int s = 0; s < 1000; ++s) {
            const double in[] = {std::uniform_real_distribution<double>(dom[0].lo, dom[0].hi)(rng),
                                 std::uniform_real_distribution<double>(dom[1].lo, dom[1].hi)(rng)};
            const auto w = eval_all(fd, in);
            for (std::size_t j = 0; j < fd.size(); ++j) {
                if (!iv[j].contains(w[j])) {
                    FAIL_CHECK("observable " << j + 1 << " value " << w[j] << " outside " << iv[j].to_string());
                }
            }
        }
    }
}
