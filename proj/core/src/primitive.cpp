#include "funcdec/primitive.hpp"

#include "funcdec/error.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace funcdec {

namespace {

struct PrimInfo {
    Prim prim;
    std::string_view name;
    int arity;
    bool grammar_function;
};

constexpr std::array<PrimInfo, 19> kPrims{{
    {Prim::Sin, "sin", 1, true},
    {Prim::Cos, "cos", 1, true},
    {Prim::Tan, "tan", 1, true},
    {Prim::Exp, "exp", 1, true},
    {Prim::Log, "log", 1, true},
    {Prim::Sqrt, "sqrt", 1, true},
    {Prim::Abs, "abs", 1, true},
    {Prim::Tanh, "tanh", 1, true},
    {Prim::Sig, "sig", 1, true},
    {Prim::HardSig, "hardsig", 1, true},
    {Prim::Step, "step", 1, true},
    {Prim::Sq, "sq", 1, true},
    {Prim::PowK, "pow_k", 1, false},
    {Prim::Recip, "recip", 1, false},
    {Prim::PowBase, "pow_base", 1, false},
    {Prim::Composite, "composite", 1, false},
    {Prim::Mul, "mul", 2, false},
    {Prim::Div, "div", 2, false},
    {Prim::Pow, "pow", 2, false},
}};

const PrimInfo& info(Prim p) noexcept {
    for (const auto& i : kPrims) {
        if (i.prim == p) return i;
    }
    return kPrims[0];
}

double checked(double v, std::string_view what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite result");
    return v;
}

double param(std::span<const double> params, Prim p) {
    if (params.empty()) throw DomainError(std::string(name(p)) + ": missing parameter");
    return params[0];
}

} // namespace

int arity(Prim p) noexcept { return info(p).arity; }

bool is_commutative(Prim p) noexcept { return p == Prim::Mul; }

std::string_view name(Prim p) noexcept { return info(p).name; }

std::optional<Prim> function_from_name(std::string_view n) noexcept {
    for (const auto& i : kPrims) {
        if (i.grammar_function && i.name == n) return i.prim;
    }
    return std::nullopt;
}

std::optional<Prim> prim_from_name(std::string_view n) noexcept {
    for (const auto& i : kPrims) {
        if (i.name == n) return i.prim;
    }
    return std::nullopt;
}

double hard_sigmoid(double x) noexcept {
    if (x < -2.5) return 0.0;
    if (x > 2.5) return 1.0;
    return 0.2 * x + 0.5;
}

double apply_unary(Prim p, double x, std::span<const double> params) {
    switch (p) {
    case Prim::Sin: return std::sin(x);
    case Prim::Cos: return std::cos(x);
    case Prim::Tan: return checked(std::tan(x), "tan");
    case Prim::Exp: return checked(std::exp(x), "exp");
    case Prim::Log:
        if (!(x > 0.0)) throw DomainError("log of non-positive value");
        return std::log(x);
    case Prim::Sqrt:
        if (x < 0.0) throw DomainError("sqrt of negative value");
        return std::sqrt(x);
    case Prim::Abs: return std::abs(x);
    case Prim::Tanh: return std::tanh(x);
    case Prim::Sig: return 1.0 / (1.0 + std::exp(-x));
    case Prim::HardSig: return hard_sigmoid(x);
    case Prim::Step: return x < 0.0 ? 0.0 : 1.0;
    case Prim::Sq: return checked(x * x, "sq");
    case Prim::PowK: {
        const double k = param(params, p);
        if (x < 0.0 && k != std::floor(k)) throw DomainError("non-integer power of negative value");
        if (x == 0.0 && k < 0.0) throw DomainError("negative power of zero");
        return checked(std::pow(x, k), "pow_k");
    }
    case Prim::Recip:
        if (x == 0.0) throw DomainError("division by zero");
        return checked(param(params, p) / x, "recip");
    case Prim::PowBase: {
        const double b = param(params, p);
        if (!(b > 0.0)) throw DomainError("non-positive base of variable exponent");
        return checked(std::pow(b, x), "pow_base");
    }
    case Prim::Composite:
    case Prim::Mul:
    case Prim::Div:
    case Prim::Pow: break;
    }
    throw DomainError(std::string(name(p)) + " is not a plain unary primitive");
}

double apply_binary(Prim p, double a, double b) {
    switch (p) {
    case Prim::Mul: return checked(a * b, "mul");
    case Prim::Div:
        if (b == 0.0) throw DomainError("division by zero");
        return checked(a / b, "div");
    case Prim::Pow:
        if (a < 0.0 && b != std::floor(b)) throw DomainError("non-integer power of negative value");
        if (a == 0.0 && b < 0.0) throw DomainError("negative power of zero");
        return checked(std::pow(a, b), "pow");
    default: break;
    }
    throw DomainError(std::string(name(p)) + " is not a binary primitive");
}

} // namespace funcdec
