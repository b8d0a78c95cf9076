#include "funcdec/interval.hpp"

#include "funcdec/error.hpp"
#include "numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace funcdec {

Interval::Interval(double l, double h) : lo(l), hi(h) {
    if (!std::isfinite(l) || !std::isfinite(h)) throw DomainError("interval bounds must be finite");
    if (l > h) throw DomainError("empty interval [" + detail::pretty(l) + ", " + detail::pretty(h) + "]");
}

double Interval::mag() const noexcept { return std::max(std::abs(lo), std::abs(hi)); }

std::string Interval::to_string() const { return "[" + detail::pretty(lo) + ", " + detail::pretty(hi) + "]"; }

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

namespace {

constexpr double kPi = std::numbers::pi;

Interval from_values(std::initializer_list<double> vs) {
    const auto [lo, hi] = std::minmax(vs);
    return {lo, hi};
}

Interval monotone(Prim p, const Interval& x, std::span<const double> params) {
    return from_values({apply_unary(p, x.lo, params), apply_unary(p, x.hi, params)});
}

// True when some t = phase + k*period lies in [lo, hi].
bool hits(double lo, double hi, double phase, double period) {
    const double k = std::ceil((lo - phase) / period);
    return phase + k * period <= hi;
}

Interval sine(const Interval& x) {
    if (x.width() >= 2 * kPi) return {-1.0, 1.0};
    double lo = std::min(std::sin(x.lo), std::sin(x.hi));
    double hi = std::max(std::sin(x.lo), std::sin(x.hi));
    if (hits(x.lo, x.hi, kPi / 2, 2 * kPi)) hi = 1.0;
    if (hits(x.lo, x.hi, -kPi / 2, 2 * kPi)) lo = -1.0;
    return {lo, hi};
}

Interval cosine(const Interval& x) {
    if (x.width() >= 2 * kPi) return {-1.0, 1.0};
    double lo = std::min(std::cos(x.lo), std::cos(x.hi));
    double hi = std::max(std::cos(x.lo), std::cos(x.hi));
    if (hits(x.lo, x.hi, 0.0, 2 * kPi)) hi = 1.0;
    if (hits(x.lo, x.hi, kPi, 2 * kPi)) lo = -1.0;
    return {lo, hi};
}

Interval power_k(const Interval& x, double k) {
    const bool integer = k == std::floor(k);
    if (x.lo < 0.0 && !integer) throw DomainError("non-integer power of a possibly negative value");
    if (k < 0.0 && x.contains(0.0)) throw DomainError("negative power of an interval containing zero");
    if (x.lo < 0.0 && x.hi > 0.0) {
        // k is a positive integer here.
        Interval r = from_values({std::pow(x.lo, k), std::pow(x.hi, k)});
        return hull(r, Interval::point(0.0));
    }
    return from_values({apply_unary(Prim::PowK, x.lo, std::span(&k, 1)), apply_unary(Prim::PowK, x.hi, std::span(&k, 1))});
}

Interval mul(const Interval& a, const Interval& b) {
    return from_values({a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi});
}

Interval reciprocal(const Interval& b) {
    if (b.contains(0.0)) throw DomainError("division by an interval containing zero");
    return from_values({1.0 / b.lo, 1.0 / b.hi});
}

} // namespace

Interval interval_apply(Prim p, std::span<const Interval> args, std::span<const double> params) {
    if (args.size() != static_cast<std::size_t>(arity(p))) throw DimensionError("interval_apply: wrong argument count");
    const Interval& x = args[0];
    switch (p) {
    case Prim::Sin: return sine(x);
    case Prim::Cos: return cosine(x);
    case Prim::Tan:
        if (hits(x.lo, x.hi, kPi / 2, kPi)) throw DomainError("tan over an interval containing a pole");
        return monotone(p, x, params);
    case Prim::Log:
        if (!(x.lo > 0.0)) throw DomainError("log over an interval reaching non-positive values");
        return monotone(p, x, params);
    case Prim::Sqrt:
        if (x.lo < 0.0) throw DomainError("sqrt over an interval reaching negative values");
        return monotone(p, x, params);
    case Prim::Exp:
    case Prim::Tanh:
    case Prim::Sig:
    case Prim::HardSig:
    case Prim::Step:
    case Prim::PowBase: return monotone(p, x, params);
    case Prim::Abs:
    case Prim::Sq: {
        Interval r = monotone(p, x, params);
        return x.contains(0.0) ? Interval{0.0, r.hi} : r;
    }
    case Prim::PowK:
        if (params.empty()) throw DomainError("pow_k: missing exponent");
        return power_k(x, params[0]);
    case Prim::Recip: {
        if (params.empty()) throw DomainError("recip: missing numerator");
        const Interval r = reciprocal(x);
        return from_values({params[0] * r.lo, params[0] * r.hi});
    }
    case Prim::Mul: return mul(x, args[1]);
    case Prim::Div: return mul(x, reciprocal(args[1]));
    case Prim::Pow: {
        if (!(x.lo > 0.0)) throw DomainError("variable exponent over a base interval reaching non-positive values");
        const Interval l = monotone(Prim::Log, x, {});
        const Interval e = mul(l, args[1]);
        return monotone(Prim::Exp, e, {});
    }
    case Prim::Composite: break;
    }
    throw DomainError("interval_apply: composite needs its expression tree");
}

Interval interval_eval(const ExprNode& node, const Interval& arg) {
    switch (node.kind) {
    case ExprNode::Kind::Arg: return arg;
    case ExprNode::Kind::Unary: return interval_apply(node.op, interval_eval(*node.children[0], arg), node.params);
    case ExprNode::Kind::Binary: {
        const Interval ab[] = {interval_eval(*node.children[0], arg), interval_eval(*node.children[1], arg)};
        return interval_apply(node.op, ab, {});
    }
    case ExprNode::Kind::Affine: {
        double lo = node.offset, hi = node.offset;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            const Interval c = interval_eval(*node.children[i], arg);
            const double k = node.coeffs[i];
            lo += k >= 0 ? k * c.lo : k * c.hi;
            hi += k >= 0 ? k * c.hi : k * c.lo;
        }
        return {lo, hi};
    }
    }
    return arg;
}

namespace {

// Values a primitive can never leave; inflation is clipped to these.
Interval codomain(const ObservableExpr& o) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Interval r;
    r.lo = -inf;
    r.hi = inf;
    if (o.kind != ObsKind::Unary) return r;
    switch (o.op) {
    case Prim::Sin:
    case Prim::Cos:
    case Prim::Tanh: r.lo = -1.0; r.hi = 1.0; break;
    case Prim::Sig:
    case Prim::HardSig:
    case Prim::Step: r.lo = 0.0; r.hi = 1.0; break;
    case Prim::Exp:
    case Prim::Sqrt:
    case Prim::Abs:
    case Prim::Sq:
    case Prim::PowBase: r.lo = 0.0; break;
    default: break;
    }
    return r;
}

} // namespace

std::vector<Interval> propagate(const FunctionalDecomposition& fd, std::span<const Interval> domain, double inflation) {
    if (domain.size() != fd.n_x) throw DimensionError("propagate: expected " + std::to_string(fd.n_x) + " input intervals");
    std::vector<Interval> w;
    w.reserve(fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) {
        const auto& o = fd.observables[j];
        try {
            Interval r;
            switch (o.kind) {
            case ObsKind::Input: r = domain[o.slot]; break;
            case ObsKind::Unary:
                r = o.op == Prim::Composite ? interval_eval(*o.composite, w[o.args[0]]) : interval_apply(o.op, w[o.args[0]], o.params);
                break;
            case ObsKind::Binary: {
                const Interval ab[] = {w[o.args[0]], w[o.args[1]]};
                r = interval_apply(o.op, ab, {});
                break;
            }
            case ObsKind::Affine: {
                double lo = o.offset, hi = o.offset;
                for (const auto& t : o.terms) {
                    const Interval& c = w[t.index];
                    lo += t.coeff >= 0 ? t.coeff * c.lo : t.coeff * c.hi;
                    hi += t.coeff >= 0 ? t.coeff * c.hi : t.coeff * c.lo;
                }
                r = Interval{lo, hi};
                break;
            }
            }
            if (o.kind != ObsKind::Input && inflation > 0.0) {
                const double pad = inflation * std::max(1.0, r.mag());
                const Interval cd = codomain(o);
                r = Interval{std::max(r.lo - pad, std::min(cd.lo, r.lo)), std::min(r.hi + pad, std::max(cd.hi, r.hi))};
            }
            w.push_back(r);
        } catch (const DomainError& e) {
            if (e.observable()) throw;
            throw DomainError(e.what(), j);
        }
    }
    return w;
}

} // namespace funcdec
