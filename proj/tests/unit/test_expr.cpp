#include <doctest.h>

#include <funcdec/error.hpp>
#include <funcdec/expr.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace funcdec;

namespace {

std::vector<std::string> texts(const std::vector<Token>& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts) out.push_back(t.text());
    return out;
}

bool stack_evaluable(const RpnExpr& rpn) {
    long depth = 0;
    for (const auto& t : rpn.tokens) {
        switch (t.kind) {
        case TokenKind::Number:
        case TokenKind::Variable: ++depth; break;
        case TokenKind::Function:
        case TokenKind::UnaryMinus:
            if (depth < 1) return false;
            break;
        case TokenKind::BinaryOp:
            if (depth < 2) return false;
            --depth;
            break;
        default: return false;
        }
    }
    return depth == 1;
}

} // namespace

TEST_CASE("tokenize splits operands, operators and calls") {
    CHECK(texts(tokenize("x+y*z")) == std::vector<std::string>{"x", "+", "y", "*", "z"});
    CHECK(texts(tokenize("3*y*cos(x)^2")) == std::vector<std::string>{"3", "*", "y", "*", "cos", "(", "x", ")", "^", "2"});
    const auto neg = tokenize("-x");
    REQUIRE(neg.size() == 2);
    CHECK(neg[0].kind == TokenKind::UnaryMinus);
    CHECK(neg[0].text() == "neg");
    CHECK(neg[1].kind == TokenKind::Variable);
}

TEST_CASE("tokenize distinguishes unary and binary minus by left context") {
    const auto ts = tokenize("a-(-b)*-c");
    CHECK(ts[1].kind == TokenKind::BinaryOp);
    CHECK(ts[3].kind == TokenKind::UnaryMinus);
    CHECK(ts[7].kind == TokenKind::UnaryMinus);
}

TEST_CASE("tokenize parses numeric literals as finite doubles") {
    const auto ts = tokenize("1.5e3 + .25");
    CHECK(ts[0].value == 1500.0);
    CHECK(ts[2].value == 0.25);
    CHECK_THROWS_AS(tokenize("1e999"), ParseError);
    CHECK_THROWS_AS(tokenize("1.2.3"), ParseError);
    CHECK_THROWS_AS(tokenize("2e"), ParseError);
}

TEST_CASE("tokenize rejects unknown characters and functions") {
    CHECK_THROWS_AS(tokenize("x $ y"), ParseError);
    CHECK_THROWS_AS(tokenize("foo(x)"), ParseError);
    CHECK_THROWS_AS(tokenize("sin + 1"), ParseError);   // reserved name used as a variable
    try {
        tokenize("x + #");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);
    }
}

TEST_CASE("to_rpn reproduces the worked conversions") {
    CHECK(parse("x+y*z").to_string() == "x y z * +");
    CHECK(parse("3*y*cos(x)^2").to_string() == "3 y x cos 2 ^ * *");
    CHECK(parse("x").to_string() == "x");
}

TEST_CASE("to_rpn precedence and associativity") {
    CHECK(parse("a^b^c").to_string() == "a b c ^ ^");
    CHECK(parse("a-b-c").to_string() == "a b - c -");
    CHECK(parse("a/b/c").to_string() == "a b / c /");
    CHECK(parse("a+b+c").to_string() == "a b + c +");
    CHECK(parse("-x^2").to_string() == "x 2 ^ neg");
    CHECK(parse("-x*y").to_string() == "x neg y *");
    CHECK(parse("sin(x)+sin(x)^2").to_string() == "x sin x sin 2 ^ +");
}

TEST_CASE("to_rpn rejects malformed input") {
    CHECK_THROWS_AS(parse("(x+y"), ParseError);
    CHECK_THROWS_AS(parse("x+y)"), ParseError);
    CHECK_THROWS_AS(parse("x+"), ParseError);
    CHECK_THROWS_AS(parse("*x"), ParseError);
    CHECK_THROWS_AS(parse("2x"), ParseError);
    CHECK_THROWS_AS(parse("x y"), ParseError);
    CHECK_THROWS_AS(parse("sin()"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("eval_rpn examples") {
    CHECK(eval_rpn(parse("x+y*z"), {{"x", 1}, {"y", 2}, {"z", 3}}) == 7.0);
    CHECK(eval_rpn(parse("sin(x)+sin(x)^2"), {{"x", 0}}) == 0.0);
    CHECK(eval_rpn(parse("3*y*cos(x)^2"), {{"y", 1}, {"x", 0}}) == 3.0);
    CHECK(eval_rpn(parse("hardsig(3)"), {}) == 1.0);
    CHECK(eval_rpn(parse("step(0)"), {}) == 1.0);
}

TEST_CASE("eval_rpn errors") {
    CHECK_THROWS_AS(eval_rpn(parse("log(x)"), {{"x", -1}}), DomainError);
    CHECK_THROWS_AS(eval_rpn(parse("sqrt(x)"), {{"x", -1}}), DomainError);
    CHECK_THROWS_AS(eval_rpn(parse("x+y"), {{"x", 1}}), Error);
}

TEST_CASE("property: RPN evaluation matches a recursive-descent evaluator") {
    oracle::ExprGenerator gen({"x", "y", "z"}, 20240611);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int checked = 0;
    for (int e = 0; e < 1000; ++e) {
        const std::string src = gen.next(1 + e % 5);
        const auto rpn = parse(src);
        REQUIRE(stack_evaluable(rpn));
        for (int a = 0; a < 10; ++a) {
            const std::map<std::string, double> vars = {{"x", u(rng)}, {"y", u(rng)}, {"z", u(rng)}};
            const double want = oracle::ref_eval(src, vars);
            Assignment asg(vars.begin(), vars.end());
            const double got = eval_rpn(rpn, asg);
            INFO(src);
            CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
            ++checked;
        }
    }
    CHECK(checked == 10000);
}

TEST_CASE("property: RPN keeps every non-parenthesis token") {
    oracle::ExprGenerator gen({"a", "b"}, 99);
    for (int e = 0; e < 300; ++e) {
        const auto src = gen.next(4);
        auto in = texts(tokenize(src));
        in.erase(std::remove_if(in.begin(), in.end(), [](const std::string& s) { return s == "(" || s == ")"; }), in.end());
        auto out = texts(parse(src).tokens);
        std::sort(in.begin(), in.end());
        std::sort(out.begin(), out.end());
        CHECK(in == out);
    }
}

TEST_CASE("variables are listed in first-appearance order") {
    CHECK(parse("y*x+y").variables() == std::vector<std::string>{"y", "x"});
}
