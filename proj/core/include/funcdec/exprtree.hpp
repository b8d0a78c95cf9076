#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "funcdec/primitive.hpp"

namespace funcdec {

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

// Immutable expression tree over a single free argument. Used as the payload
// of fused unary observables produced by graph contraction, where the same
// sub-expression may legitimately appear more than once.
struct ExprNode {
    enum class Kind { Arg, Unary, Binary, Affine };

    Kind kind = Kind::Arg;
    Prim op = Prim::Sin;          // Unary / Binary; never Composite
    std::vector<double> params;   // Unary parameters (pow_k, recip, pow_base)
    std::vector<ExprPtr> children;
    std::vector<double> coeffs;   // Affine: one per child
    double offset = 0.0;          // Affine

    static ExprPtr arg();
    static ExprPtr unary(Prim op, ExprPtr child, std::vector<double> params = {});
    static ExprPtr binary(Prim op, ExprPtr lhs, ExprPtr rhs);
    static ExprPtr affine(std::vector<ExprPtr> children, std::vector<double> coeffs, double offset);
};

double eval(const ExprNode& node, double x);

// Replaces every Arg leaf of `node` with `replacement`.
ExprPtr substitute(const ExprPtr& node, const ExprPtr& replacement);

// Normal form used for structural equality: nested affine nodes are flattened,
// identical terms merged, terms sorted, zero coefficients dropped, and the
// operands of commutative primitives ordered.
ExprPtr canonicalize(const ExprPtr& node);

// Human-readable rendering with the argument printed as `arg_name`.
std::string to_string(const ExprNode& node, std::string_view arg_name = "x");

// Exact textual key of the canonical form (full-precision numbers).
std::string canonical_key(const ExprPtr& node);

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    return canonical_key(a) == canonical_key(b);
}

// True when the tree contains a Step node (a discontinuity).
bool has_discontinuity(const ExprNode& node);

} // namespace funcdec
