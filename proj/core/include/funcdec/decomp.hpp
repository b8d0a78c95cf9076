#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "funcdec/expr.hpp"
#include "funcdec/exprtree.hpp"
#include "funcdec/primitive.hpp"

namespace funcdec {

// Observable indices are 0-based in this API. Text renderings, JSON, DOT and
// the command line use 1-based names (w_1 is index 0).

enum class ObsKind { Input, Unary, Binary, Affine };

struct AffineTerm {
    std::size_t index;
    double coeff;
    friend bool operator==(const AffineTerm&, const AffineTerm&) = default;
};

struct ObservableExpr {
    ObsKind kind = ObsKind::Input;
    std::size_t slot = 0;              // Input
    Prim op = Prim::Sin;               // Unary / Binary
    std::vector<std::size_t> args;     // Unary: 1, Binary: 2
    std::vector<double> params;        // Unary parameters
    ExprPtr composite;                 // Unary with op == Composite
    std::vector<AffineTerm> terms;     // Affine, sorted by index, no zeros
    double offset = 0.0;               // Affine

    static ObservableExpr input(std::size_t slot);
    static ObservableExpr unary(Prim op, std::size_t arg, std::vector<double> params = {});
    static ObservableExpr composite_of(ExprPtr tree, std::size_t arg);
    static ObservableExpr binary(Prim op, std::size_t lhs, std::size_t rhs);
    // Terms are normalized: merged, sorted, zero coefficients dropped.
    static ObservableExpr affine(std::vector<AffineTerm> terms, double offset);

    // Referenced observable indices (args or affine term indices).
    std::vector<std::size_t> operands() const;
    // Key used for structural equality; equal keys mean equal functions of
    // equal operands.
    std::string canonical_key() const;
    // Right-hand side, e.g. "sin(w_3)" or "w_2 + w_4".
    std::string to_string() const;
    // Expression tree over the (single) operand; Unary observables only.
    ExprPtr as_tree() const;
    // Observable whose value is constant (affine with no terms).
    bool is_constant() const noexcept { return kind == ObsKind::Affine && terms.empty(); }
};

struct FunctionalDecomposition {
    std::size_t n_x = 0;
    std::vector<ObservableExpr> observables;
    std::vector<std::size_t> outputs;
    std::vector<std::string> variable_names;   // empty or size n_x

    std::size_t size() const noexcept { return observables.size(); }
    std::size_t non_input_count() const noexcept { return observables.size() - n_x; }
    // Throws InvariantError on any violated structural invariant.
    void validate() const;
    // One line per observable, "w_j = ...", outputs marked.
    std::string to_string() const;
};

// Operand during compilation: a literal constant or an existing observable.
struct Operand {
    std::optional<std::size_t> index;
    double value = 0.0;

    static Operand constant(double v) { return {std::nullopt, v}; }
    static Operand obs(std::size_t i) { return {i, 0.0}; }
    bool is_constant() const noexcept { return !index.has_value(); }
};

// Incremental decomposition construction with canonicalization. Constant
// operands fold into parameters, offsets and coefficients; they never become
// observables unless materialized as outputs. With dedup enabled, an
// observable structurally equal to an existing one is reused.
class DecompositionBuilder {
public:
    DecompositionBuilder(std::size_t n_x, bool dedup, std::vector<std::string> names = {});

    Operand input(std::size_t slot) const;
    Operand unary(Prim op, Operand a, std::vector<double> params = {});
    Operand composite(const ExprPtr& tree, Operand a);
    Operand binary(Prim op, Operand a, Operand b);
    Operand affine(std::span<const std::pair<Operand, double>> terms, double offset);

    Operand add(Operand a, Operand b);
    Operand sub(Operand a, Operand b);
    Operand neg(Operand a);
    Operand scale(Operand a, double c);
    Operand mul(Operand a, Operand b);
    Operand div(Operand a, Operand b);
    Operand pow(Operand a, Operand b);

    // Constant operands are materialized as term-free affine observables.
    std::size_t materialize(Operand a);
    FunctionalDecomposition finish(std::span<const Operand> outputs);

    // Appends an observable, reusing an equal one when dedup is on.
    std::size_t emit(ObservableExpr e);
    const FunctionalDecomposition& current() const noexcept { return fd_; }

private:
    FunctionalDecomposition fd_;
    bool dedup_;
    std::unordered_map<std::string, std::size_t> seen_;
};

// Algorithm-1 style compilation: one observable per operator application.
FunctionalDecomposition decompose_basic(const RpnExpr& rpn, std::size_t n_x);
FunctionalDecomposition decompose_basic(const RpnExpr& rpn, std::span<const std::string> variables);
// Algorithm-2 style compilation: equal candidates reuse existing observables.
FunctionalDecomposition decompose_dedup(const RpnExpr& rpn, std::size_t n_x);
FunctionalDecomposition decompose_dedup(const RpnExpr& rpn, std::span<const std::string> variables);

// Vector-valued function: one output per element, shared observables reused.
// Variables default to first-appearance order across all elements.
FunctionalDecomposition concat_vector(std::span<const RpnExpr> elements,
                                      std::span<const std::string> variables = {});

// The RPN stream of the •-wrapped sum used by concat_vector.
RpnExpr wrap_vector(std::span<const RpnExpr> elements);

// Re-runs canonical deduplication over an existing decomposition.
FunctionalDecomposition dedup(const FunctionalDecomposition& fd);

// Substitutes affine observables into affine consumers until no affine
// observable with a single consumer (itself affine) remains. Outputs and
// `keep` survive. Unused non-output observables are dropped. The optional map
// sends old indices to new ones (nullopt when folded away).
FunctionalDecomposition fold_affine(const FunctionalDecomposition& fd, std::span<const std::size_t> keep = {},
                                    std::vector<std::optional<std::size_t>>* index_map = nullptr);

// Removes observables not needed by any output or `keep`, reindexing. The
// returned map sends old indices to new ones (nullopt when dropped).
FunctionalDecomposition prune_unused(const FunctionalDecomposition& fd, std::span<const std::size_t> keep,
                                     std::vector<std::optional<std::size_t>>* index_map = nullptr);

std::vector<double> eval_all(const FunctionalDecomposition& fd, std::span<const double> inputs);
std::vector<double> eval_fd(const FunctionalDecomposition& fd, std::span<const double> inputs);

// Single-variable expression tree from RPN, e.g. for structural comparisons.
ExprPtr tree_from_rpn(const RpnExpr& rpn, std::string_view variable);

// JSON round trip (1-based indices). Loading validates every invariant.
std::string to_json(const FunctionalDecomposition& fd, int indent = 2);
FunctionalDecomposition fd_from_json(std::string_view text);

} // namespace funcdec
