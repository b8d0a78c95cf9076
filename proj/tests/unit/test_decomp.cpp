#include <doctest.h>

#include <funcdec/decomp.hpp>
#include <funcdec/error.hpp>

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace funcdec;

namespace {

using OE = ObservableExpr;

bool same(const OE& a, const OE& b) { return a.canonical_key() == b.canonical_key(); }

OE aff(std::vector<AffineTerm> t, double off = 0.0) { return OE::affine(std::move(t), off); }

std::vector<std::string> names(std::initializer_list<const char*> n) { return {n.begin(), n.end()}; }

const char* kNested = "cos(sin(x1*x2))+sin(cos(sin(x1*x2)))+sin(x1*x2)";

} // namespace

TEST_CASE("basic compilation of sin(x)+sin(x)^2 keeps the duplicate sine") {
    const auto fd = decompose_basic(parse("sin(x)+sin(x)^2"), 1);
    REQUIRE(fd.size() == 5);
    CHECK(same(fd.observables[1], OE::unary(Prim::Sin, 0)));
    CHECK(same(fd.observables[2], OE::unary(Prim::Sin, 0)));
    CHECK(same(fd.observables[3], OE::unary(Prim::Sq, 2)));
    // The printed listing adds w_3 + w_4, but w_2 is the first sine and the
    // one on the left of the sum.
    CHECK(same(fd.observables[4], aff({{1, 1.0}, {3, 1.0}})));
    CHECK(fd.outputs == std::vector<std::size_t>{4});
}

TEST_CASE("dedup compilation of sin(x)+sin(x)^2") {
    const auto fd = decompose_dedup(parse("sin(x)+sin(x)^2"), 1);
    REQUIRE(fd.size() == 4);
    CHECK(same(fd.observables[1], OE::unary(Prim::Sin, 0)));
    CHECK(same(fd.observables[2], OE::unary(Prim::Sq, 1)));
    CHECK(same(fd.observables[3], aff({{1, 1.0}, {2, 1.0}})));
}

TEST_CASE("dedup compilation of the nested trigonometric function") {
    const auto fd = decompose_dedup(parse(kNested), 2);
    REQUIRE(fd.size() == 8);
    CHECK(same(fd.observables[2], OE::binary(Prim::Mul, 0, 1)));
    CHECK(same(fd.observables[3], OE::unary(Prim::Sin, 2)));
    CHECK(same(fd.observables[4], OE::unary(Prim::Cos, 3)));
    CHECK(same(fd.observables[5], OE::unary(Prim::Sin, 4)));
    CHECK(same(fd.observables[6], aff({{4, 1.0}, {5, 1.0}})));
    CHECK(same(fd.observables[7], aff({{3, 1.0}, {6, 1.0}})));
    CHECK(fd.outputs == std::vector<std::size_t>{7});
}

TEST_CASE("trivial compilations") {
    const auto id = decompose_basic(parse("x"), 1);
    CHECK(id.size() == 1);
    CHECK(id.outputs == std::vector<std::size_t>{0});
    const auto sum = decompose_basic(parse("x+y"), 2);
    REQUIRE(sum.size() == 3);
    CHECK(sum.observables[2].kind == ObsKind::Affine);
    CHECK(same(sum.observables[2], aff({{0, 1.0}, {1, 1.0}})));
}

TEST_CASE("constants fold into parameters, offsets and coefficients") {
    // One observable per operator: the scaling and the offset stay separate
    // until affine folding.
    const auto a = decompose_basic(parse("2*x+1"), 1);
    REQUIRE(a.size() == 3);
    CHECK(same(a.observables[1], aff({{0, 2.0}})));
    CHECK(same(a.observables[2], aff({{1, 1.0}}, 1.0)));
    const auto af = fold_affine(a);
    REQUIRE(af.size() == 2);
    CHECK(same(af.observables[1], aff({{0, 2.0}}, 1.0)));
    const auto b = decompose_basic(parse("x^3"), 1);
    REQUIRE(b.size() == 2);
    CHECK(b.observables[1].op == Prim::PowK);
    CHECK(b.observables[1].params == std::vector<double>{3.0});
    const auto c = decompose_basic(parse("x^2"), 1);
    CHECK(c.observables[1].op == Prim::Sq);
    const auto d = decompose_basic(parse("x/4"), 1);
    CHECK(same(d.observables[1], aff({{0, 0.25}})));
    const auto e = decompose_basic(parse("x/y"), 2);
    CHECK(e.observables[2].op == Prim::Div);
    const auto f = decompose_basic(parse("x^y"), 2);
    CHECK(f.observables[2].op == Prim::Pow);
}

TEST_CASE("dedup catches commuted operands") {
    const auto fd = decompose_dedup(parse("sin(x*y)+cos(y*x)"), 2);
    std::size_t muls = 0;
    for (const auto& o : fd.observables) muls += o.kind == ObsKind::Binary && o.op == Prim::Mul;
    CHECK(muls == 1);
}

TEST_CASE("dedup is a no-op without repeated sub-expressions") {
    const auto rpn = parse("exp(x)*cos(y)+tanh(x-y)");
    const auto a = decompose_basic(rpn, 2), b = decompose_dedup(rpn, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(same(a.observables[j], b.observables[j]));
}

TEST_CASE("variables named w_k address input slots") {
    const auto fd = decompose_basic(parse("sin(w_2)+w_1"), 2);
    CHECK(same(fd.observables[2], OE::unary(Prim::Sin, 1)));
    CHECK_THROWS_AS(decompose_basic(parse("x+y"), 3), DimensionError);
}

TEST_CASE("vector functions share observables and record outputs") {
    const RpnExpr e1[] = {parse("sin(x)"), parse("cos(sin(x))")};
    const auto fd = concat_vector(e1);
    REQUIRE(fd.size() == 3);
    CHECK(same(fd.observables[1], OE::unary(Prim::Sin, 0)));
    CHECK(same(fd.observables[2], OE::unary(Prim::Cos, 1)));
    CHECK(fd.outputs == std::vector<std::size_t>{1, 2});

    const RpnExpr e2[] = {parse("x"), parse("x")};
    const auto id = concat_vector(e2);
    CHECK(id.size() == 1);
    CHECK(id.outputs == std::vector<std::size_t>{0, 0});

    const RpnExpr e3[] = {parse("x+y"), parse("x+y")};
    const auto s = concat_vector(e3);
    REQUIRE(s.size() == 3);
    CHECK(same(s.observables[2], aff({{0, 1.0}, {1, 1.0}})));
    CHECK(s.outputs == std::vector<std::size_t>{2, 2});
}

TEST_CASE("wrap_vector marks each element with an output marker") {
    const RpnExpr e[] = {parse("x"), parse("y")};
    const auto w = wrap_vector(e);
    std::size_t markers = 0;
    for (const auto& t : w.tokens) markers += t.kind == TokenKind::OutputMarker;
    CHECK(markers == 2);
    const auto fd = decompose_dedup(w, 2);
    CHECK(fd.outputs == std::vector<std::size_t>{0, 1});
}

TEST_CASE("fold_affine merges single-consumer affine chains") {
    DecompositionBuilder b(2, false, names({"x", "y"}));
    const auto s = b.add(b.input(0), b.input(1));
    const auto t = b.affine(std::vector<std::pair<Operand, double>>{{s, 2.0}}, 1.0);
    const Operand outs[] = {t};
    const auto fd = b.finish(outs);
    REQUIRE(fd.size() == 4);
    const auto folded = fold_affine(fd);
    REQUIRE(folded.size() == 3);
    CHECK(same(folded.observables[2], aff({{0, 2.0}, {1, 2.0}}, 1.0)));

    const auto plain = decompose_dedup(parse("sin(x)*cos(x)"), 1);
    const auto again = fold_affine(plain);
    CHECK(again.size() == plain.size());
}

TEST_CASE("fold_affine keeps affine observables with several consumers or a keep mark") {
    const auto fd = decompose_dedup(parse("sin(x+y)+cos(x+y)"), 2);
    const auto folded = fold_affine(fd);
    CHECK(folded.size() == fd.size());

    DecompositionBuilder b(1, false);
    const auto s = b.scale(b.input(0), 3.0);
    const auto t = b.add(s, Operand::constant(1.0));
    const Operand outs[] = {t};
    const auto chain = b.finish(outs);
    const std::size_t keep[] = {1};
    std::vector<std::optional<std::size_t>> map;
    const auto kept = fold_affine(chain, keep, &map);
    CHECK(kept.size() == chain.size());
    CHECK(map[1] == std::optional<std::size_t>(1));
    std::vector<std::optional<std::size_t>> map2;
    const auto merged = fold_affine(chain, {}, &map2);
    CHECK(merged.size() == 2);
    CHECK(!map2[1].has_value());
    CHECK(map2[2] == std::optional<std::size_t>(1));
}

TEST_CASE("eval_fd examples") {
    const auto fd7 = decompose_dedup(parse("sin(x)+sin(x)^2"), 1);
    const double half_pi[] = {std::numbers::pi / 2};
    CHECK(eval_fd(fd7, half_pi)[0] == doctest::Approx(2.0).epsilon(1e-15));
    const auto fd9 = decompose_dedup(parse(kNested), 2);
    const double at[] = {0.0, 17.0};
    CHECK(eval_fd(fd9, at)[0] == doctest::Approx(std::sin(1.0) + 1.0).epsilon(1e-15));
    const auto id = decompose_basic(parse("x"), 1);
    const double v[] = {-3.5};
    CHECK(eval_fd(id, v)[0] == -3.5);
    const double bad[] = {1.0, 2.0};
    CHECK_THROWS_AS(eval_fd(id, bad), DimensionError);
}

TEST_CASE("eval_fd reports the failing observable") {
    const auto fd = decompose_basic(parse("sin(x)+log(x)"), 1);
    const double in[] = {-1.0};
    try {
        eval_fd(fd, in);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        REQUIRE(e.observable().has_value());
        CHECK(fd.observables[*e.observable()].op == Prim::Log);
    }
}

TEST_CASE("JSON round trip preserves every observable") {
    const auto fd = decompose_dedup(parse("hardsig(2*x-y)+x^3/exp(y)+sin(x)^2.5"), 2);
    const auto back = fd_from_json(to_json(fd));
    REQUIRE(back.size() == fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) CHECK(same(back.observables[j], fd.observables[j]));
    CHECK(back.outputs == fd.outputs);
    CHECK(back.variable_names == fd.variable_names);
}

TEST_CASE("JSON loading validates invariants") {
    CHECK_THROWS_AS(fd_from_json("{"), ParseError);
    CHECK_THROWS_AS(fd_from_json(R"({"n_x":1,"observables":[{"index":1,"kind":"input","slot":1},
        {"index":2,"kind":"unary","op":"sin","args":[2]}],"outputs":[2]})"),
                    InvariantError);
    CHECK_THROWS_AS(fd_from_json(R"({"n_x":1,"observables":[{"index":1,"kind":"input","slot":1}],"outputs":[3]})"),
                    InvariantError);
}

TEST_CASE("property: compiled decompositions agree with RPN evaluation") {
    oracle::ExprGenerator gen({"x", "y"}, 4242);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int e = 0; e < 200; ++e) {
        const auto src = gen.next(1 + e % 5);
        const auto rpn = parse(src);
        const std::vector<std::string> vars = {"x", "y"};
        const auto basic = decompose_basic(rpn, vars);
        const auto dd = decompose_dedup(rpn, vars);
        const auto folded = fold_affine(dd);
        INFO(src);
        CHECK(dd.size() <= basic.size());
        for (const auto* fd : {&basic, &dd, &folded}) {
            CHECK_NOTHROW(fd->validate());
            for (std::size_t j = fd->n_x; j < fd->size(); ++j) {
                for (auto a : fd->observables[j].operands()) CHECK(a < j);
            }
        }
        // No two observables of the deduplicated form are canonically equal.
        std::set<std::string> keys;
        for (std::size_t j = dd.n_x; j < dd.size(); ++j) CHECK(keys.insert(dd.observables[j].canonical_key()).second);
        for (int a = 0; a < 100; ++a) {
            const double in[] = {u(rng), u(rng)};
            const double want = eval_rpn(rpn, {{"x", in[0]}, {"y", in[1]}});
            const double tol = 1e-12 * std::max(1.0, std::abs(want));
            CHECK(std::abs(eval_fd(basic, in)[0] - want) <= tol);
            CHECK(std::abs(eval_fd(dd, in)[0] - want) <= tol);
            CHECK(std::abs(eval_fd(folded, in)[0] - want) <= tol);
        }
    }
}
