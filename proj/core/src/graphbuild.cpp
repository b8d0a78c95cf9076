#include "funcdec/graphbuild.hpp"

#include "funcdec/error.hpp"
#include "json_detail.hpp"
#include "numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <numbers>
#include <utility>

namespace funcdec {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Bounds sorted(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

// Range of a polynomial-like g over [lo, hi] given its interior critical points.
template <class G>
Bounds range_with_critical(G g, double lo, double hi, std::initializer_list<double> critical) {
    Bounds r = sorted(g(lo), g(hi));
    for (double c : critical) {
        if (c > lo && c < hi) {
            r.lo = std::min(r.lo, g(c));
            r.hi = std::max(r.hi, g(c));
        }
    }
    return r;
}

bool affine_tree(const ExprNode& n) {
    if (n.kind == ExprNode::Kind::Arg) return true;
    if (n.kind != ExprNode::Kind::Affine) return false;
    return std::all_of(n.children.begin(), n.children.end(), [](const ExprPtr& c) { return affine_tree(*c); });
}

Bounds sampled_curvature(const ExprNode& tree, const Interval& x) {
    if (affine_tree(tree)) return {0.0, 0.0};
    constexpr int n = 1024;
    const double h = x.width() / (n - 1);
    if (h <= 0.0) return {0.0, 0.0};
    std::vector<double> f(n);
    for (int k = 0; k < n; ++k) f[k] = eval(tree, x.lo + h * k);
    double lo = kInf, hi = -kInf;
    for (int k = 1; k + 1 < n; ++k) {
        const double d2 = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / (h * h);
        lo = std::min(lo, d2);
        hi = std::max(hi, d2);
    }
    return {lo - 0.5 * std::abs(lo), hi + 0.5 * std::abs(hi)};
}

} // namespace

// ------------------------------------------------------------------ config

double ApproxConfig::tol_for(Prim p) const {
    if (auto it = tol_by_prim.find(name(p)); it != tol_by_prim.end()) return it->second;
    return tol;
}

void ApproxConfig::validate() const {
    if (!(tol > 0.0)) throw DomainError("approximation tolerance must be positive");
    for (const auto& [k, v] : tol_by_prim) {
        if (!prim_from_name(k)) throw DomainError("unknown primitive '" + k + "' in tolerance map");
        if (!(v > 0.0)) throw DomainError("tolerance for '" + k + "' must be positive");
    }
    if (max_segments < 1) throw DomainError("max_segments must be at least 1");
    if (step_a > 0.0) throw DomainError("step parameter a must not be positive");
}

// ------------------------------------------------------------------ specs

PrimitiveSpec PrimitiveSpec::of(Prim p, std::vector<double> params) {
    if (p == Prim::Composite) throw DomainError("composite primitives need their expression tree");
    PrimitiveSpec s;
    s.id = p;
    s.params = std::move(params);
    return s;
}

PrimitiveSpec PrimitiveSpec::composite(ExprPtr tree) {
    if (!tree) throw DomainError("composite primitive without an expression");
    PrimitiveSpec s;
    s.id = Prim::Composite;
    s.tree = std::move(tree);
    return s;
}

PrimitiveSpec PrimitiveSpec::of(const ObservableExpr& o) {
    if (o.kind == ObsKind::Unary) return o.op == Prim::Composite ? composite(o.composite) : of(o.op, o.params);
    if (o.kind == ObsKind::Binary) return of(o.op);
    throw DomainError("only unary and binary observables have primitive specs");
}

int PrimitiveSpec::arity() const noexcept { return funcdec::arity(id); }

double PrimitiveSpec::eval(double x) const {
    return id == Prim::Composite ? funcdec::eval(*tree, x) : apply_unary(id, x, params);
}

double PrimitiveSpec::eval(double a, double b) const { return apply_binary(id, a, b); }

Interval PrimitiveSpec::range(const Interval& x) const {
    return id == Prim::Composite ? interval_eval(*tree, x) : interval_apply(id, x, params);
}

bool PrimitiveSpec::piecewise_affine() const noexcept {
    return id == Prim::Abs || id == Prim::HardSig || id == Prim::Step;
}

std::vector<double> PrimitiveSpec::kinks() const {
    switch (id) {
    case Prim::Abs:
    case Prim::Step: return {0.0};
    case Prim::HardSig: return {-2.5, 2.5};
    default: return {};
    }
}

Bounds PrimitiveSpec::curvature(const Interval& x) const {
    switch (id) {
    case Prim::Sin: {
        const Interval s = interval_apply(Prim::Sin, x);
        return {-s.hi, -s.lo};
    }
    case Prim::Cos: {
        const Interval c = interval_apply(Prim::Cos, x);
        return {-c.hi, -c.lo};
    }
    case Prim::Tan: {
        const Interval t = interval_apply(Prim::Tan, x);
        auto g = [](double v) { return 2.0 * v * (1.0 + v * v); };
        return {g(t.lo), g(t.hi)};
    }
    case Prim::Exp: {
        const Interval e = interval_apply(Prim::Exp, x);
        return {e.lo, e.hi};
    }
    case Prim::Log: return {-1.0 / (x.lo * x.lo), -1.0 / (x.hi * x.hi)};
    case Prim::Sqrt: {
        auto g = [](double v) { return v > 0.0 ? -0.25 * std::pow(v, -1.5) : -kInf; };
        return {g(x.lo), g(x.hi)};
    }
    case Prim::Abs:
    case Prim::HardSig:
    case Prim::Step: return {0.0, 0.0};
    case Prim::Tanh: {
        const Interval t = interval_apply(Prim::Tanh, x);
        const double c = 1.0 / std::sqrt(3.0);
        return range_with_critical([](double v) { return -2.0 * v + 2.0 * v * v * v; }, t.lo, t.hi, {-c, c});
    }
    case Prim::Sig: {
        const Interval s = interval_apply(Prim::Sig, x);
        const double r = std::sqrt(3.0) / 6.0;
        return range_with_critical([](double v) { return v - 3.0 * v * v + 2.0 * v * v * v; }, s.lo, s.hi, {0.5 - r, 0.5 + r});
    }
    case Prim::Sq: return {2.0, 2.0};
    case Prim::PowK: {
        const double k = params.at(0), kk = k * (k - 1.0);
        if (kk == 0.0) return {0.0, 0.0};
        const double e = k - 2.0;
        Interval p;
        try {
            p = interval_apply(Prim::PowK, x, std::span<const double>(&e, 1));
        } catch (const DomainError&) {
            return {-kInf, kInf};
        }
        return sorted(kk * p.lo, kk * p.hi);
    }
    case Prim::Recip: {
        const double c = params.at(0);
        if (x.contains(0.0)) return {-kInf, kInf};
        return sorted(2.0 * c / (x.lo * x.lo * x.lo), 2.0 * c / (x.hi * x.hi * x.hi));
    }
    case Prim::PowBase: {
        const double l = std::log(params.at(0));
        return sorted(l * l * std::pow(params[0], x.lo), l * l * std::pow(params[0], x.hi));
    }
    case Prim::Composite: return sampled_curvature(*tree, x);
    case Prim::Mul:
    case Prim::Div:
    case Prim::Pow: break;
    }
    throw DomainError(std::string(name(id)) + " has no unary curvature bound");
}

// ------------------------------------------------------------------ bands

namespace {

struct Segment {
    double a, b;      // breakpoints
    double fa, fb;    // curve values there
    double lo, hi;    // vertical offsets of the band around the secant
};

class VertexSet {
public:
    Index add(double x, double y) {
        const auto key = std::make_pair(x, y);
        if (auto it = index_.find(key); it != index_.end()) return it->second;
        const Index id = static_cast<Index>(points_.size());
        index_.emplace(key, id);
        points_.push_back(key);
        return id;
    }
    Index add3(double x, double y, double z) {
        const auto key = std::make_tuple(x, y, z);
        if (auto it = index3_.find(key); it != index3_.end()) return it->second;
        const Index id = static_cast<Index>(points3_.size());
        index3_.emplace(key, id);
        points3_.push_back(key);
        return id;
    }
    PolyUnion finish2(const std::vector<std::vector<Index>>& pieces) const {
        PolyUnion P;
        P.V.resize(2, static_cast<Index>(points_.size()));
        for (std::size_t k = 0; k < points_.size(); ++k) {
            P.V(0, static_cast<Index>(k)) = points_[k].first;
            P.V(1, static_cast<Index>(k)) = points_[k].second;
        }
        fill(P, pieces, points_.size());
        return P;
    }
    PolyUnion finish3(const std::vector<std::vector<Index>>& pieces) const {
        PolyUnion P;
        P.V.resize(3, static_cast<Index>(points3_.size()));
        for (std::size_t k = 0; k < points3_.size(); ++k) {
            P.V(0, static_cast<Index>(k)) = std::get<0>(points3_[k]);
            P.V(1, static_cast<Index>(k)) = std::get<1>(points3_[k]);
            P.V(2, static_cast<Index>(k)) = std::get<2>(points3_[k]);
        }
        fill(P, pieces, points3_.size());
        return P;
    }

private:
    static void fill(PolyUnion& P, const std::vector<std::vector<Index>>& pieces, std::size_t nv) {
        P.M = Eigen::MatrixXi::Zero(static_cast<Index>(nv), static_cast<Index>(pieces.size()));
        for (std::size_t j = 0; j < pieces.size(); ++j) {
            for (Index v : pieces[j]) P.M(v, static_cast<Index>(j)) = 1;
        }
    }
    std::map<std::pair<double, double>, Index> index_;
    std::vector<std::pair<double, double>> points_;
    std::map<std::tuple<double, double, double>, Index> index3_;
    std::vector<std::tuple<double, double, double>> points3_;
};

PolyUnion segments_to_union(const std::vector<Segment>& segs) {
    VertexSet vs;
    std::vector<std::vector<Index>> pieces;
    for (const auto& s : segs) {
        std::vector<Index> piece{vs.add(s.a, s.fa + s.lo), vs.add(s.b, s.fb + s.lo)};
        if (s.hi > s.lo) {
            piece.push_back(vs.add(s.a, s.fa + s.hi));
            piece.push_back(vs.add(s.b, s.fb + s.hi));
        }
        std::sort(piece.begin(), piece.end());
        piece.erase(std::unique(piece.begin(), piece.end()), piece.end());
        pieces.push_back(std::move(piece));
    }
    return vs.finish2(pieces);
}

// max of sign*(f - secant) over [a,b] for f convex or concave there (the
// deviation is then unimodal).
double unimodal_max(const PrimitiveSpec& f, double a, double b, double fa, double fb, double sign) {
    auto e = [&](double x) { return sign * (f.eval(x) - (fa + (fb - fa) * (x - a) / (b - a))); };
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double l = a, r = b;
    double x1 = r - g * (r - l), x2 = l + g * (r - l);
    double e1 = e(x1), e2 = e(x2);
    for (int it = 0; it < 200 && r - l > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (e1 < e2) {
            l = x1;
            x1 = x2;
            e1 = e2;
            x2 = l + g * (r - l);
            e2 = e(x2);
        } else {
            r = x2;
            x2 = x1;
            e2 = e1;
            x1 = r - g * (r - l);
            e1 = e(x1);
        }
    }
    return std::max({0.0, e1, e2});
}

// Offsets (lo <= 0 <= hi) with f - secant in [lo, hi] on [a, b]; false when
// no finite bound is available.
bool band_offsets(const PrimitiveSpec& f, Segment& s) {
    if (f.piecewise_affine() || s.b == s.a) {
        s.lo = s.hi = 0.0;
        return true;
    }
    const double h = s.b - s.a;
    const Bounds c = f.curvature(Interval{s.a, s.b});
    double lo = std::min(0.0, -c.hi * h * h / 8.0);
    double hi = std::max(0.0, -c.lo * h * h / 8.0);
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        if (c.lo >= 0.0) {
            lo = -unimodal_max(f, s.a, s.b, s.fa, s.fb, -1.0) * (1.0 + 1e-9);
            hi = 0.0;
        } else if (c.hi <= 0.0) {
            lo = 0.0;
            hi = unimodal_max(f, s.a, s.b, s.fa, s.fb, 1.0) * (1.0 + 1e-9);
        } else {
            return false;
        }
    }
    // Rounding pad; exactly affine pieces stay zero-width.
    const double pad = c.lo == 0.0 && c.hi == 0.0 ? 0.0 : 1e-12 * std::max({1.0, std::abs(s.fa), std::abs(s.fb)});
    s.lo = lo - pad;
    s.hi = hi + pad;
    return true;
}

PolyUnion step_band(const Interval& dom, double a) {
    VertexSet vs;
    std::vector<std::vector<Index>> pieces;
    if (dom.hi < 0.0) {
        pieces.push_back({vs.add(dom.lo, 0.0), vs.add(dom.hi, 0.0)});
    } else if (dom.lo >= 0.0) {
        pieces.push_back({vs.add(dom.lo, 1.0), vs.add(dom.hi, 1.0)});
    } else {
        const double aa = std::max(a, dom.lo);
        pieces.push_back({vs.add(dom.lo, 0.0), vs.add(aa, 0.0)});
        pieces.push_back({vs.add(0.0, 1.0), vs.add(dom.hi, 1.0)});
    }
    for (auto& p : pieces) p.erase(std::unique(p.begin(), p.end()), p.end());
    return vs.finish2(pieces);
}

} // namespace

PolyUnion sos_unary(const PrimitiveSpec& f, const Interval& dom, const ApproxConfig& cfg) {
    if (f.arity() != 1) throw DomainError(std::string(name(f.id)) + " is not unary");
    if (f.id == Prim::Step) return step_band(dom, cfg.step_a);
    if (f.tree && has_discontinuity(*f.tree)) throw DomainError("cannot band a discontinuous composite expression");
    const double tol = cfg.tol_for(f.id);
    if (dom.is_point()) {
        PolyUnion P;
        P.V.resize(2, 1);
        P.V << dom.lo, f.eval(dom.lo);
        P.M = Eigen::MatrixXi::Ones(1, 1);
        return P;
    }
    std::vector<double> cuts{dom.lo};
    for (double k : f.kinks()) {
        if (k > dom.lo && k < dom.hi) cuts.push_back(k);
    }
    cuts.push_back(dom.hi);

    std::vector<Segment> out;
    const double min_width = 1e-12 * std::max(1.0, dom.mag());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        // Depth-first bisection, left half first, so `out` stays ordered.
        std::vector<std::pair<double, double>> stack{{cuts[c], cuts[c + 1]}};
        while (!stack.empty()) {
            const auto [a, b] = stack.back();
            stack.pop_back();
            Segment s{a, b, f.eval(a), f.eval(b), 0.0, 0.0};
            const bool bounded = band_offsets(f, s);
            if (bounded && (s.hi - s.lo) / 2.0 <= tol) {
                out.push_back(s);
                if (out.size() > cfg.max_segments) break;
                continue;
            }
            if (b - a <= min_width) {
                throw BudgetError("band for " + std::string(name(f.id)) + " cannot reach tolerance " + detail::pretty(tol) + " near " + detail::pretty(a));
            }
            const double m = 0.5 * (a + b);
            stack.push_back({m, b});
            stack.push_back({a, m});
        }
        if (out.size() > cfg.max_segments) break;
    }
    if (out.size() > cfg.max_segments) {
        throw BudgetError("band for " + std::string(name(f.id)) + " over " + dom.to_string() + " needs more than " +
                          std::to_string(cfg.max_segments) + " segments at tolerance " + detail::pretty(tol));
    }
    return segments_to_union(out);
}

PolyUnion exact_step(const Interval& dom, double a) {
    if (!(dom.lo < 0.0 && dom.hi > 0.0)) throw DomainError("exact_step: domain " + dom.to_string() + " does not straddle 0");
    if (!(a <= 0.0 && a >= dom.lo)) throw DomainError("exact_step: a must lie in [lo, 0]");
    PolyUnion P;
    P.V.resize(2, 4);
    P.V << dom.lo, a, 0.0, dom.hi, 0.0, 0.0, 1.0, 1.0;
    P.M.resize(4, 2);
    P.M << 1, 0, 1, 0, 0, 1, 0, 1;
    return P;
}

// ---------------------------------------------------------------- products

FunctionalDecomposition rewrite_products(const FunctionalDecomposition& fd) {
    fd.validate();
    // Only the new sums, differences and squares are shared; redundancy
    // already present in fd is kept as is.
    DecompositionBuilder b(fd.n_x, false, fd.variable_names);
    std::map<std::tuple<char, std::size_t, std::size_t>, Operand> shared;
    auto reuse = [&shared](char tag, std::size_t p, std::size_t q, auto make) {
        const auto key = std::make_tuple(tag, p, q);
        auto it = shared.find(key);
        if (it == shared.end()) it = shared.emplace(key, make()).first;
        return it->second;
    };
    std::vector<Operand> map(fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) {
        const auto& o = fd.observables[j];
        switch (o.kind) {
        case ObsKind::Input: map[j] = b.input(o.slot); break;
        case ObsKind::Unary:
            map[j] = o.op == Prim::Composite ? b.composite(o.composite, map[o.args[0]]) : b.unary(o.op, map[o.args[0]], o.params);
            break;
        case ObsKind::Binary: {
            const Operand x = map[o.args[0]], y = map[o.args[1]];
            if (o.op != Prim::Mul || x.is_constant() || y.is_constant()) {
                map[j] = b.binary(o.op, x, y);
                break;
            }
            const std::size_t xi = *x.index, yi = *y.index;
            const Operand s = reuse('+', std::min(xi, yi), std::max(xi, yi), [&] { return b.add(x, y); });
            const Operand d = reuse('-', xi, yi, [&] { return b.sub(x, y); });
            auto square = [&](Operand v) {
                return v.is_constant() ? Operand::constant(v.value * v.value)
                                       : reuse('q', *v.index, 0, [&] { return b.unary(Prim::Sq, v); });
            };
            const Operand s2 = square(s), d2 = square(d);
            const std::pair<Operand, double> t[] = {{s2, 0.25}, {d2, -0.25}};
            map[j] = b.affine(t, 0.0);
            break;
        }
        case ObsKind::Affine: {
            std::vector<std::pair<Operand, double>> t;
            for (const auto& term : o.terms) t.emplace_back(map[term.index], term.coeff);
            map[j] = b.affine(t, o.offset);
            break;
        }
        }
    }
    std::vector<Operand> outs;
    for (std::size_t k : fd.outputs) outs.push_back(map[k]);
    return b.finish(outs);
}

namespace {

struct Cell {
    double x0, x1, y0, y1;
    double z00, z01, z10, z11;
    double e;   // interpolation error bound
};

Cell make_cell(const PrimitiveSpec& f, double x0, double x1, double y0, double y1) {
    Cell c{x0, x1, y0, y1, f.eval(x0, y0), f.eval(x0, y1), f.eval(x1, y0), f.eval(x1, y1), 0.0};
    if (f.id == Prim::Div) {
        // f_xx = 0 and f_yy = 2x/y^3; bilinear interpolation error <= hy^2/8 max|f_yy|.
        const double hy = y1 - y0;
        const double ymin = std::min(std::abs(y0), std::abs(y1));
        const double xmax = std::max(std::abs(x0), std::abs(x1));
        c.e = hy * hy / 8.0 * 2.0 * xmax / (ymin * ymin * ymin);
    }
    c.e += 1e-12 * std::max({1.0, std::abs(c.z00), std::abs(c.z01), std::abs(c.z10), std::abs(c.z11)});
    return c;
}

double half_width(const Cell& c) { return c.e + std::abs(c.z00 + c.z11 - c.z01 - c.z10) / 4.0; }

std::vector<Cell> grid(const PrimitiveSpec& f, const Interval& d1, const Interval& d2, std::size_t n) {
    const std::size_t nx = d1.is_point() ? 1 : n, ny = d2.is_point() ? 1 : n;
    std::vector<Cell> cells;
    cells.reserve(nx * ny);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x0 = d1.lo + d1.width() * static_cast<double>(i) / static_cast<double>(nx);
        const double x1 = i + 1 == nx ? d1.hi : d1.lo + d1.width() * static_cast<double>(i + 1) / static_cast<double>(nx);
        for (std::size_t k = 0; k < ny; ++k) {
            const double y0 = d2.lo + d2.width() * static_cast<double>(k) / static_cast<double>(ny);
            const double y1 = k + 1 == ny ? d2.hi : d2.lo + d2.width() * static_cast<double>(k + 1) / static_cast<double>(ny);
            cells.push_back(make_cell(f, x0, x1, y0, y1));
        }
    }
    return cells;
}

bool grid_ok(const std::vector<Cell>& cells, double tol) {
    return std::all_of(cells.begin(), cells.end(), [&](const Cell& c) { return half_width(c) <= tol; });
}

} // namespace

PolyUnion binary_sos_union(const PrimitiveSpec& f, const Interval& dom1, const Interval& dom2, const ApproxConfig& cfg) {
    if (f.id != Prim::Mul && f.id != Prim::Div) throw DomainError("grid bands exist for mul and div only");
    if (f.id == Prim::Div && dom2.contains(0.0)) throw DomainError("div band over a divisor interval containing zero");
    const double tol = cfg.tol_for(f.id);
    // Smallest power of two that works, then bisect down to the smallest n.
    std::size_t hi = 1;
    std::vector<Cell> cells = grid(f, dom1, dom2, hi);
    while (!grid_ok(cells, tol)) {
        if (hi >= cfg.max_segments) {
            throw BudgetError(std::string(name(f.id)) + " band over " + dom1.to_string() + " x " + dom2.to_string() + " needs more than " +
                              std::to_string(cfg.max_segments) + " cells per axis at tolerance " + detail::pretty(tol));
        }
        hi = std::min(2 * hi, cfg.max_segments);
        cells = grid(f, dom1, dom2, hi);
    }
    std::size_t lo = hi / 2;   // fails (or is 0)
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        auto trial = grid(f, dom1, dom2, mid);
        if (grid_ok(trial, tol)) {
            hi = mid;
            cells = std::move(trial);
        } else {
            lo = mid;
        }
    }
    if (cells.size() != grid(f, dom1, dom2, hi).size()) cells = grid(f, dom1, dom2, hi);
    VertexSet vs;
    std::vector<std::vector<Index>> pieces;
    for (const auto& c : cells) {
        std::vector<Index> piece;
        const double xs[] = {c.x0, c.x0, c.x1, c.x1}, ys[] = {c.y0, c.y1, c.y0, c.y1}, zs[] = {c.z00, c.z01, c.z10, c.z11};
        for (int k = 0; k < 4; ++k) {
            piece.push_back(vs.add3(xs[k], ys[k], zs[k] - c.e));
            piece.push_back(vs.add3(xs[k], ys[k], zs[k] + c.e));
        }
        std::sort(piece.begin(), piece.end());
        piece.erase(std::unique(piece.begin(), piece.end()), piece.end());
        pieces.push_back(std::move(piece));
    }
    return vs.finish3(pieces);
}

HybridZonotope binary_sos(const PrimitiveSpec& f, const Interval& dom1, const Interval& dom2, const ApproxConfig& cfg) {
    return from_poly_union(binary_sos_union(f, dom1, dom2, cfg));
}

// ------------------------------------------------------------ composition

namespace {

using TwoValues = std::optional<std::pair<double, double>>;

// Observables that only ever take one of two values (step outputs and affine
// or product combinations of them).
std::vector<TwoValues> two_valued(const FunctionalDecomposition& fd) {
    std::vector<TwoValues> tv(fd.size());
    for (std::size_t j = fd.n_x; j < fd.size(); ++j) {
        const auto& o = fd.observables[j];
        if (o.kind == ObsKind::Unary && o.op == Prim::Step) {
            tv[j] = std::make_pair(0.0, 1.0);
        } else if (o.kind == ObsKind::Affine && o.terms.size() == 1 && tv[o.terms[0].index]) {
            const auto [p, q] = *tv[o.terms[0].index];
            tv[j] = std::make_pair(o.terms[0].coeff * p + o.offset, o.terms[0].coeff * q + o.offset);
        } else if (o.kind == ObsKind::Binary && o.op == Prim::Mul && tv[o.args[0]] && tv[o.args[1]]) {
            const auto [p1, q1] = *tv[o.args[0]];
            const auto [p2, q2] = *tv[o.args[1]];
            std::vector<double> v{p1 * p2, p1 * q2, q1 * p2, q1 * q2};
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            if (v.size() <= 2) tv[j] = std::make_pair(v.front(), v.back());
        }
    }
    return tv;
}

// Exact graph of a*b when a takes only the values {p, q}: one segment per value.
PolyUnion gated_product(std::pair<double, double> values, const Interval& other, bool gate_first) {
    VertexSet vs;
    std::vector<std::vector<Index>> pieces;
    for (double v : {values.first, values.second}) {
        std::vector<Index> piece;
        for (double y : {other.lo, other.hi}) {
            piece.push_back(gate_first ? vs.add3(v, y, v * y) : vs.add3(y, v, v * y));
        }
        piece.erase(std::unique(piece.begin(), piece.end()), piece.end());
        if (std::find(pieces.begin(), pieces.end(), piece) == pieces.end()) pieces.push_back(std::move(piece));
    }
    return vs.finish3(pieces);
}

MatrixXd selector(const std::vector<std::size_t>& coords, Index dim) {
    MatrixXd R = MatrixXd::Zero(static_cast<Index>(coords.size()), dim);
    for (std::size_t k = 0; k < coords.size(); ++k) R(static_cast<Index>(k), static_cast<Index>(coords[k])) = 1.0;
    return R;
}

std::string obs_name(const FunctionalDecomposition& fd, std::size_t j) {
    if (j < fd.n_x && fd.variable_names.size() == fd.n_x) return fd.variable_names[j];
    return "w_" + std::to_string(j + 1);
}

} // namespace

GraphSet build_graph_set(const FunctionalDecomposition& fd, std::span<const Interval> domain, const ApproxConfig& cfg) {
    cfg.validate();
    fd.validate();
    if (domain.size() != fd.n_x) {
        throw DimensionError("build_graph_set: " + std::to_string(fd.n_x) + " input intervals required, got " + std::to_string(domain.size()));
    }
    GraphSet gs;
    gs.built = cfg.product_mode == ProductMode::Rewrite ? rewrite_products(fd) : fd;
    const auto& w = gs.built;
    const auto iv = propagate(w, domain);
    const auto tv = two_valued(w);

    HybridZonotope Z = HybridZonotope::box(domain);
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto& o = w.observables[j];
        ObservableReport rep;
        rep.index = j;
        rep.expr = o.kind == ObsKind::Input ? obs_name(w, j) : o.to_string();
        rep.range = iv[j];
        if (o.kind == ObsKind::Input) {
            rep.method = "input";
            gs.report.push_back(std::move(rep));
            continue;
        }
        try {
            const Interval range_j[] = {iv[j]};
            if (o.kind == ObsKind::Affine) {
                rep.method = "affine";
                Z = cartesian_product(Z, HybridZonotope::box(range_j));
                MatrixXd R = MatrixXd::Zero(1, Z.dim());
                for (const auto& t : o.terms) R(0, static_cast<Index>(t.index)) = t.coeff;
                R(0, static_cast<Index>(j)) = -1.0;
                Z = intersect_lifted(Z, HybridZonotope::point(VectorXd::Constant(1, -o.offset)), R);
                gs.report.push_back(std::move(rep));
                continue;
            }
            PolyUnion band;
            std::vector<std::size_t> coords;
            if (o.kind == ObsKind::Unary) {
                const auto spec = PrimitiveSpec::of(o);
                const Interval& dom = iv[o.args[0]];
                band = sos_unary(spec, dom, cfg);
                rep.method = dom.is_point() ? "point" : o.op == Prim::Step ? "step" : "band";
                rep.rigorous = spec.rigorous();
                coords = {o.args[0], j};
            } else {
                const std::size_t a = o.args[0], b = o.args[1];
                if (o.op == Prim::Mul && cfg.product_mode == ProductMode::Direct && (tv[a] || tv[b])) {
                    band = tv[a] ? gated_product(*tv[a], iv[b], true) : gated_product(*tv[b], iv[a], false);
                    rep.method = "gated";
                } else if (o.op == Prim::Mul || o.op == Prim::Div) {
                    band = binary_sos_union(PrimitiveSpec::of(o.op), iv[a], iv[b], cfg);
                    rep.method = "grid";
                } else {
                    throw DomainError("no band construction for " + std::string(name(o.op)));
                }
                coords = {a, b, j};
            }
            rep.segments = static_cast<std::size_t>(band.n_pieces());
            // Largest vertical extent of any piece, halved.
            for (Index p = 0; p < band.n_pieces(); ++p) {
                const Index last = band.V.rows() - 1;
                std::map<std::vector<double>, std::pair<double, double>> spans;
                for (Index v = 0; v < band.n_vertices(); ++v) {
                    if (band.M(v, p) == 0) continue;
                    std::vector<double> key(band.V.col(v).data(), band.V.col(v).data() + last);
                    auto [it, fresh] = spans.emplace(key, std::make_pair(band.V(last, v), band.V(last, v)));
                    if (!fresh) {
                        it->second.first = std::min(it->second.first, band.V(last, v));
                        it->second.second = std::max(it->second.second, band.V(last, v));
                    }
                }
                for (const auto& [k, s] : spans) rep.error_bound = std::max(rep.error_bound, 0.5 * (s.second - s.first));
            }
            gs.total_segments += rep.segments;
            Z = cartesian_product(Z, HybridZonotope::box(range_j));
            Z = intersect_lifted(Z, from_poly_union(band), selector(coords, Z.dim()));
        } catch (const DomainError& e) {
            if (e.observable()) throw;
            throw DomainError(e.what(), j);
        }
        gs.report.push_back(std::move(rep));
    }
    std::vector<Index> keep;
    for (std::size_t k = 0; k < w.n_x; ++k) {
        keep.push_back(static_cast<Index>(k));
        gs.coordinates.push_back(obs_name(w, k));
    }
    for (std::size_t k = 0; k < w.outputs.size(); ++k) {
        keep.push_back(static_cast<Index>(w.outputs[k]));
        gs.coordinates.push_back(w.outputs.size() == 1 ? "f" : "f" + std::to_string(k + 1));
    }
    gs.set = project(Z, keep);
    return gs;
}

std::string report_to_json(const GraphSet& gs, int indent) {
    using nlohmann::json;
    json j;
    j["n"] = gs.set.dim();
    j["n_g"] = gs.set.n_g();
    j["n_b"] = gs.set.n_b();
    j["n_c"] = gs.set.n_c();
    j["coordinates"] = gs.coordinates;
    j["total_segments"] = gs.total_segments;
    json obs = json::array();
    for (const auto& r : gs.report) {
        json e;
        e["index"] = r.index + 1;
        e["expr"] = r.expr;
        e["range"] = {r.range.lo, r.range.hi};
        e["method"] = r.method;
        if (r.method != "input" && r.method != "affine") {
            e["segments"] = r.segments;
            e["error_bound"] = r.error_bound;
            e["rigorous"] = r.rigorous;
        }
        obs.push_back(std::move(e));
    }
    j["observables"] = std::move(obs);
    return j.dump(indent);
}

} // namespace funcdec
