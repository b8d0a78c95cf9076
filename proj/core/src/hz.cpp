#include "funcdec/hz.hpp"

#include "funcdec/error.hpp"
#include "milp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace funcdec {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void HybridZonotope::validate() const {
    const Index n = c.size(), nc = b.size();
    if (Gc.rows() != n || Gb.rows() != n) throw DimensionError("generator rows must match the center dimension");
    if (Ac.rows() != nc || Ab.rows() != nc) throw DimensionError("constraint rows must match the length of b");
    if (Ac.cols() != Gc.cols()) throw DimensionError("Ac and Gc must have the same number of columns");
    if (Ab.cols() != Gb.cols()) throw DimensionError("Ab and Gb must have the same number of columns");
}

HybridZonotope HybridZonotope::box(std::span<const Interval> sides) {
    const auto n = static_cast<Index>(sides.size());
    HybridZonotope Z;
    Z.Gc = MatrixXd::Zero(n, n);
    Z.Gb.resize(n, 0);
    Z.c.resize(n);
    for (Index k = 0; k < n; ++k) {
        Z.Gc(k, k) = 0.5 * sides[k].width();
        Z.c(k) = sides[k].mid();
    }
    Z.Ac.resize(0, n);
    Z.Ab.resize(0, 0);
    Z.b.resize(0);
    return Z;
}

HybridZonotope HybridZonotope::point(const VectorXd& p) {
    HybridZonotope Z;
    Z.Gc.resize(p.size(), 0);
    Z.Gb.resize(p.size(), 0);
    Z.c = p;
    Z.Ac.resize(0, 0);
    Z.Ab.resize(0, 0);
    Z.b.resize(0);
    return Z;
}

void PolyUnion::validate() const {
    if (M.rows() != V.cols()) throw DimensionError("incidence rows must match the vertex count");
    if (M.cols() == 0) throw DimensionError("polytope union without pieces");
    if (!V.allFinite()) throw DomainError("vertices must be finite");
    for (Index j = 0; j < M.cols(); ++j) {
        bool any = false;
        for (Index i = 0; i < M.rows(); ++i) {
            if (M(i, j) != 0 && M(i, j) != 1) throw InvariantError("incidence entries must be 0 or 1");
            any = any || M(i, j) == 1;
        }
        if (!any) throw InvariantError("piece " + std::to_string(j + 1) + " selects no vertex");
    }
}

HybridZonotope affine_map(const HybridZonotope& Z, const MatrixXd& R, const VectorXd& t) {
    Z.validate();
    if (R.cols() != Z.dim()) throw DimensionError("affine_map: R has " + std::to_string(R.cols()) + " columns, set dimension is " + std::to_string(Z.dim()));
    if (t.size() != R.rows()) throw DimensionError("affine_map: translation length must equal the rows of R");
    HybridZonotope out;
    out.Gc = R * Z.Gc;
    out.Gb = R * Z.Gb;
    out.c = R * Z.c + t;
    out.Ac = Z.Ac;
    out.Ab = Z.Ab;
    out.b = Z.b;
    return out;
}

HybridZonotope project(const HybridZonotope& Z, std::span<const Index> coords) {
    MatrixXd R = MatrixXd::Zero(static_cast<Index>(coords.size()), Z.dim());
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (coords[k] < 0 || coords[k] >= Z.dim()) throw DimensionError("project: coordinate out of range");
        R(static_cast<Index>(k), coords[k]) = 1.0;
    }
    return affine_map(Z, R, VectorXd::Zero(R.rows()));
}

namespace {

MatrixXd block_diag(const MatrixXd& A, const MatrixXd& B) {
    MatrixXd out = MatrixXd::Zero(A.rows() + B.rows(), A.cols() + B.cols());
    out.topLeftCorner(A.rows(), A.cols()) = A;
    out.bottomRightCorner(B.rows(), B.cols()) = B;
    return out;
}

} // namespace

HybridZonotope cartesian_product(const HybridZonotope& Z1, const HybridZonotope& Z2) {
    Z1.validate();
    Z2.validate();
    HybridZonotope out;
    out.Gc = block_diag(Z1.Gc, Z2.Gc);
    out.Gb = block_diag(Z1.Gb, Z2.Gb);
    out.c.resize(Z1.dim() + Z2.dim());
    out.c << Z1.c, Z2.c;
    out.Ac = block_diag(Z1.Ac, Z2.Ac);
    out.Ab = block_diag(Z1.Ab, Z2.Ab);
    out.b.resize(Z1.n_c() + Z2.n_c());
    out.b << Z1.b, Z2.b;
    return out;
}

HybridZonotope intersect_lifted(const HybridZonotope& Z, const HybridZonotope& W, const MatrixXd& R) {
    Z.validate();
    W.validate();
    if (R.rows() != W.dim() || R.cols() != Z.dim()) throw DimensionError("intersect_lifted: R must be dim(W) x dim(Z)");
    const Index ngz = Z.n_g(), ngw = W.n_g(), nbz = Z.n_b(), nbw = W.n_b();
    const Index ncz = Z.n_c(), ncw = W.n_c(), m = W.dim();
    HybridZonotope out;
    out.Gc = MatrixXd::Zero(Z.dim(), ngz + ngw);
    out.Gc.leftCols(ngz) = Z.Gc;
    out.Gb = MatrixXd::Zero(Z.dim(), nbz + nbw);
    out.Gb.leftCols(nbz) = Z.Gb;
    out.c = Z.c;
    out.Ac = MatrixXd::Zero(ncz + ncw + m, ngz + ngw);
    out.Ab = MatrixXd::Zero(ncz + ncw + m, nbz + nbw);
    out.b.resize(ncz + ncw + m);
    out.Ac.topLeftCorner(ncz, ngz) = Z.Ac;
    out.Ab.topLeftCorner(ncz, nbz) = Z.Ab;
    out.Ac.block(ncz, ngz, ncw, ngw) = W.Ac;
    out.Ab.block(ncz, nbz, ncw, nbw) = W.Ab;
    out.Ac.block(ncz + ncw, 0, m, ngz) = R * Z.Gc;
    out.Ac.block(ncz + ncw, ngz, m, ngw) = -W.Gc;
    out.Ab.block(ncz + ncw, 0, m, nbz) = R * Z.Gb;
    out.Ab.block(ncz + ncw, nbz, m, nbw) = -W.Gb;
    out.b << Z.b, W.b, W.c - R * Z.c;
    return out;
}

HybridZonotope from_poly_union(const PolyUnion& P) {
    P.validate();
    const Index d = P.V.rows(), np = P.n_pieces();
    std::vector<Index> used, coupled;
    std::vector<Index> count(static_cast<std::size_t>(P.n_vertices()), 0);
    for (Index i = 0; i < P.n_vertices(); ++i) {
        count[i] = P.M.row(i).sum();
        if (count[i] == 0) continue;
        used.push_back(i);
        if (count[i] < np) coupled.push_back(i);
    }
    const auto nu = static_cast<Index>(used.size()), ns = static_cast<Index>(coupled.size());
    const Index nb = np > 1 ? np : 0;
    HybridZonotope Z;
    Z.Gc = MatrixXd::Zero(d, nu + ns);
    Z.Gb = MatrixXd::Zero(d, nb);
    Z.c = VectorXd::Zero(d);
    for (Index k = 0; k < nu; ++k) {
        Z.Gc.col(k) = 0.5 * P.V.col(used[k]);
        Z.c += 0.5 * P.V.col(used[k]);
    }
    const Index nc = 1 + (nb > 0 ? 1 + ns : 0);
    Z.Ac = MatrixXd::Zero(nc, nu + ns);
    Z.Ab = MatrixXd::Zero(nc, nb);
    Z.b = VectorXd::Zero(nc);
    // sum lambda = 1
    Z.Ac.row(0).head(nu).setOnes();
    Z.b(0) = 2.0 - static_cast<double>(nu);
    if (nb > 0) {
        // sum z = 1
        Z.Ab.row(1).setOnes();
        Z.b(1) = 2.0 - static_cast<double>(np);
        // lambda_i + s_i = sum_j M_ij z_j
        for (Index s = 0; s < ns; ++s) {
            const Index i = coupled[s];
            const Index k = static_cast<Index>(std::find(used.begin(), used.end(), i) - used.begin());
            Z.Ac(2 + s, k) = 1.0;
            Z.Ac(2 + s, nu + s) = 1.0;
            for (Index j = 0; j < np; ++j) Z.Ab(2 + s, j) = -static_cast<double>(P.M(i, j));
            Z.b(2 + s) = static_cast<double>(count[i]) - 2.0;
        }
    }
    return Z;
}

namespace {

detail::MilpProblem to_problem(const HybridZonotope& Z) {
    Z.validate();
    detail::MilpProblem p;
    for (Index k = 0; k < Z.n_g(); ++k) p.add_var(-1.0, 1.0);
    for (Index k = 0; k < Z.n_b(); ++k) p.add_var(-1.0, 1.0, true);
    for (Index r = 0; r < Z.n_c(); ++r) {
        detail::SparseRow row;
        for (Index k = 0; k < Z.n_g(); ++k) {
            if (Z.Ac(r, k) != 0.0) {
                row.idx.push_back(static_cast<int>(k));
                row.val.push_back(Z.Ac(r, k));
            }
        }
        for (Index k = 0; k < Z.n_b(); ++k) {
            if (Z.Ab(r, k) != 0.0) {
                row.idx.push_back(static_cast<int>(Z.n_g() + k));
                row.val.push_back(Z.Ab(r, k));
            }
        }
        row.rhs = Z.b(r);
        p.rows.push_back(std::move(row));
    }
    return p;
}

detail::SearchConfig to_config(const SearchOptions& opt) {
    detail::SearchConfig cfg;
    cfg.feas_tol = opt.feas_tol;
    cfg.max_nodes = opt.max_nodes;
    cfg.lp_prune = opt.lp_prune;
    return cfg;
}

} // namespace

bool contains(const HybridZonotope& Z, const VectorXd& p, double tol, const SearchOptions& opt) {
    if (p.size() != Z.dim()) throw DimensionError("contains: point has dimension " + std::to_string(p.size()) + ", set has " + std::to_string(Z.dim()));
    if (!(tol >= 0.0)) throw DomainError("contains: tolerance must be non-negative");
    if (!p.allFinite()) return false;
    auto prob = to_problem(Z);
    for (Index k = 0; k < Z.dim(); ++k) {
        detail::SparseRow row;
        for (Index j = 0; j < Z.n_g(); ++j) {
            if (Z.Gc(k, j) != 0.0) {
                row.idx.push_back(static_cast<int>(j));
                row.val.push_back(Z.Gc(k, j));
            }
        }
        for (Index j = 0; j < Z.n_b(); ++j) {
            if (Z.Gb(k, j) != 0.0) {
                row.idx.push_back(static_cast<int>(Z.n_g() + j));
                row.val.push_back(Z.Gb(k, j));
            }
        }
        if (tol > 0.0) {
            row.idx.push_back(prob.add_var(-tol, tol));
            row.val.push_back(-1.0);
        }
        row.rhs = p(k) - Z.c(k);
        prob.rows.push_back(std::move(row));
    }
    bool found = false;
    detail::search(prob, to_config(opt), [&](const detail::Leaf&) {
        found = true;
        return false;
    });
    return found;
}

std::size_t count_leaves(const HybridZonotope& Z, const SearchOptions& opt) {
    return detail::search(to_problem(Z), to_config(opt), [](const detail::Leaf&) { return true; }).leaves;
}

bool is_empty(const HybridZonotope& Z, const SearchOptions& opt) {
    bool found = false;
    detail::search(to_problem(Z), to_config(opt), [&](const detail::Leaf&) {
        found = true;
        return false;
    });
    return !found;
}

std::vector<Interval> interval_hull(const HybridZonotope& Z, const SearchOptions& opt) {
    const Index n = Z.dim();
    const auto nv = static_cast<std::size_t>(Z.n_g() + Z.n_b());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> lo(static_cast<std::size_t>(n), inf), hi(static_cast<std::size_t>(n), -inf);
    std::vector<double> cost(nv);
    detail::search(to_problem(Z), to_config(opt), [&](const detail::Leaf& leaf) {
        for (Index k = 0; k < n; ++k) {
            for (Index j = 0; j < Z.n_g(); ++j) cost[j] = Z.Gc(k, j);
            for (Index j = 0; j < Z.n_b(); ++j) cost[Z.n_g() + j] = Z.Gb(k, j);
            const auto mn = leaf.minimize(cost);
            for (auto& v : cost) v = -v;
            const auto mx = leaf.minimize(cost);
            if (!mn || !mx) continue;
            lo[k] = std::min(lo[k], Z.c(k) + *mn);
            hi[k] = std::max(hi[k], Z.c(k) - *mx);
        }
        return true;
    });
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        if (!(lo[k] <= hi[k])) throw DomainError("interval hull of an empty set");
        out.emplace_back(lo[k] - opt.feas_tol, hi[k] + opt.feas_tol);
    }
    return out;
}

} // namespace funcdec
