#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "funcdec/decomp.hpp"
#include "funcdec/hz.hpp"
#include "funcdec/interval.hpp"

namespace funcdec {

enum class ProductMode { Rewrite, Direct };

struct ApproxConfig {
    double tol = 0.05;                        // max vertical half-width of a band
    std::map<std::string, double, std::less<>> tol_by_prim;   // keyed by primitive name
    std::size_t max_segments = 512;
    ProductMode product_mode = ProductMode::Rewrite;
    double step_a = 0.0;                      // 0 over-approximates; a < 0 inner-approximates

    double tol_for(Prim p) const;
    void validate() const;
};

// Lower and upper bound; either may be infinite.
struct Bounds {
    double lo;
    double hi;
};

// Evaluation, range and curvature data for one primitive.
struct PrimitiveSpec {
    Prim id = Prim::Sin;
    std::vector<double> params;
    ExprPtr tree;   // Composite only

    static PrimitiveSpec of(Prim p, std::vector<double> params = {});
    static PrimitiveSpec composite(ExprPtr tree);
    // Spec of a unary or binary observable.
    static PrimitiveSpec of(const ObservableExpr& o);

    int arity() const noexcept;
    double eval(double x) const;
    double eval(double a, double b) const;
    Interval range(const Interval& x) const;
    // [min f'', max f''] over x. For composites this is a sampled estimate.
    Bounds curvature(const Interval& x) const;
    // Breakpoints of exactly piecewise-affine primitives (abs, hardsig, step).
    std::vector<double> kinks() const;
    bool piecewise_affine() const noexcept;
    bool rigorous() const noexcept { return id != Prim::Composite; }
};

// Adaptive piecewise band over dom: each piece is the parallelogram between
// two breakpoints, wide enough to contain the curve.
PolyUnion sos_unary(const PrimitiveSpec& f, const Interval& dom, const ApproxConfig& cfg);

// The two-segment step set with vertices (lo,0), (a,0), (0,1), (hi,1).
PolyUnion exact_step(const Interval& dom, double a);

// Replaces every product a*b by 0.25(a+b)^2 - 0.25(a-b)^2, reusing shared
// sums and squares.
FunctionalDecomposition rewrite_products(const FunctionalDecomposition& fd);

// 3D band over (x, y, f(x,y)) for mul or div on a uniform grid of cells.
HybridZonotope binary_sos(const PrimitiveSpec& f, const Interval& dom1, const Interval& dom2, const ApproxConfig& cfg);
// The same construction as a vertex/incidence pair (one piece per cell).
PolyUnion binary_sos_union(const PrimitiveSpec& f, const Interval& dom1, const Interval& dom2, const ApproxConfig& cfg);

struct ObservableReport {
    std::size_t index = 0;          // 0-based, in the decomposition that was built
    std::string expr;
    Interval range;
    std::string method;             // "input", "affine", "band", "step", "grid", "gated", "point"
    std::size_t segments = 0;
    double error_bound = 0.0;       // max vertical half-width of the band
    bool rigorous = true;
};

struct GraphSet {
    HybridZonotope set;                     // coordinates: inputs, then outputs
    std::vector<std::string> coordinates;
    FunctionalDecomposition built;          // decomposition after product rewriting
    std::vector<ObservableReport> report;
    std::size_t total_segments = 0;
};

GraphSet build_graph_set(const FunctionalDecomposition& fd, std::span<const Interval> domain, const ApproxConfig& cfg = {});

std::string report_to_json(const GraphSet& gs, int indent = 2);

} // namespace funcdec
