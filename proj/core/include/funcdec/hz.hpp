#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "funcdec/interval.hpp"

namespace funcdec {

// { Gc xc + Gb xb + c : xc in [-1,1]^ng, xb in {-1,1}^nb, Ac xc + Ab xb = b }
struct HybridZonotope {
    Eigen::MatrixXd Gc;   // n x ng
    Eigen::MatrixXd Gb;   // n x nb
    Eigen::VectorXd c;    // n
    Eigen::MatrixXd Ac;   // nc x ng
    Eigen::MatrixXd Ab;   // nc x nb
    Eigen::VectorXd b;    // nc

    Eigen::Index dim() const noexcept { return c.size(); }
    Eigen::Index n_g() const noexcept { return Gc.cols(); }
    Eigen::Index n_b() const noexcept { return Gb.cols(); }
    Eigen::Index n_c() const noexcept { return b.size(); }

    // Throws DimensionError when the six blocks disagree.
    void validate() const;

    static HybridZonotope box(std::span<const Interval> sides);
    static HybridZonotope point(const Eigen::VectorXd& p);
};

// Union of convex hulls: column j of M selects the vertices (columns of V)
// whose hull forms piece j.
struct PolyUnion {
    Eigen::MatrixXd V;    // d x n_v
    Eigen::MatrixXi M;    // n_v x n_p, entries 0/1

    Eigen::Index n_vertices() const noexcept { return V.cols(); }
    Eigen::Index n_pieces() const noexcept { return M.cols(); }
    void validate() const;
};

// { R z + t : z in Z }
HybridZonotope affine_map(const HybridZonotope& Z, const Eigen::MatrixXd& R, const Eigen::VectorXd& t);
// Keeps coordinates `coords` (0-based, in that order).
HybridZonotope project(const HybridZonotope& Z, std::span<const Eigen::Index> coords);
HybridZonotope cartesian_product(const HybridZonotope& Z1, const HybridZonotope& Z2);
// { z in Z : R z in W }
HybridZonotope intersect_lifted(const HybridZonotope& Z, const HybridZonotope& W, const Eigen::MatrixXd& R);

// Encoding with lambda in [0,1]^n_v (sum 1), a one-hot selector z over the
// pieces, and coupling lambda_i + s_i = sum_j M_ij z_j with slack s_i in
// [0,1]. All variables are stored in [-1,1] form. A single piece needs no
// binaries.
HybridZonotope from_poly_union(const PolyUnion& P);

struct SearchOptions {
    double feas_tol = 1e-7;           // absolute residual tolerance of the LPs
    std::size_t max_nodes = 2'000'000;
    bool lp_prune = true;             // LP checks at interior nodes
};

// Exists a member within `tol` (infinity norm) of p. Throws SolverError when
// an LP fails to reach a verdict and BudgetError when the node budget runs out.
bool contains(const HybridZonotope& Z, const Eigen::VectorXd& p, double tol = 1e-6, const SearchOptions& opt = {});

// Number of binary assignments with feasible continuous factors.
std::size_t count_leaves(const HybridZonotope& Z, const SearchOptions& opt = {});

// Per-coordinate bounds over the set, widened outward by opt.feas_tol.
// Throws DomainError when the set is empty.
std::vector<Interval> interval_hull(const HybridZonotope& Z, const SearchOptions& opt = {});

bool is_empty(const HybridZonotope& Z, const SearchOptions& opt = {});

// JSON with the six blocks as {rows, cols, data} (row-major). Loading throws
// ParseError on malformed text, DimensionError when a block's data or shape
// disagrees, InvariantError when a block is missing.
std::string hz_to_json(const HybridZonotope& Z, int indent = 2);
HybridZonotope hz_from_json(std::string_view text);

// CSV with a header row; one row per point / coordinate.
std::string points_to_csv(const std::vector<Eigen::VectorXd>& points, std::span<const std::string> header = {});
std::vector<Eigen::VectorXd> points_from_csv(std::string_view text);
std::string hull_to_csv(std::span<const Interval> hull, std::span<const std::string> names = {});

} // namespace funcdec
