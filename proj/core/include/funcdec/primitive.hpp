#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace funcdec {

// Scalar primitives an observable may apply. Affine operations (+, -, neg,
// scaling by constants) are not primitives: they live in affine observables.
enum class Prim {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
    Sig,      // logistic 1/(1+e^-x)
    HardSig,  // clip(0.2x+0.5, 0, 1)
    Step,     // 0 for x<0, 1 for x>=0
    Sq,
    PowK,     // x^k, k = params[0]
    Recip,    // k/x, k = params[0]
    PowBase,  // b^x, b = params[0]
    Composite,// fused unary expression (see ExprNode)
    Mul,
    Div,
    Pow,      // a^b with both operands variable
};

int arity(Prim p) noexcept;
bool is_commutative(Prim p) noexcept;
std::string_view name(Prim p) noexcept;

// Grammar-level unary function names (sin, cos, ..., sq). Returns nullopt for
// anything that is not a callable function in the expression language.
std::optional<Prim> function_from_name(std::string_view name) noexcept;
// Any primitive name as written by name(); used by deserializers.
std::optional<Prim> prim_from_name(std::string_view name) noexcept;

double hard_sigmoid(double x) noexcept;

// Scalar evaluation. Throws DomainError when the argument lies outside the
// primitive's domain or the result is not finite. Composite is not handled
// here (it needs its expression tree).
double apply_unary(Prim p, double x, std::span<const double> params = {});
double apply_binary(Prim p, double a, double b);

} // namespace funcdec
