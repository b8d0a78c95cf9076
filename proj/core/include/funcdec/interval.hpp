#pragma once

#include <span>
#include <string>
#include <vector>

#include "funcdec/decomp.hpp"
#include "funcdec/primitive.hpp"

namespace funcdec {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h);  // throws DomainError unless l <= h, both finite
    static Interval point(double v) { return {v, v}; }

    double width() const noexcept { return hi - lo; }
    double mid() const noexcept { return 0.5 * (lo + hi); }
    double mag() const noexcept;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }
    bool is_point() const noexcept { return lo == hi; }
    std::string to_string() const;

    friend bool operator==(const Interval&, const Interval&) = default;
};

Interval hull(const Interval& a, const Interval& b);

// Natural interval extension of a primitive. Tight for every monotone or
// piecewise-monotone primitive with known critical points; always sound.
Interval interval_apply(Prim p, std::span<const Interval> args, std::span<const double> params = {});
inline Interval interval_apply(Prim p, const Interval& a, std::span<const double> params = {}) {
    return interval_apply(p, std::span<const Interval>(&a, 1), params);
}
// Natural extension over an expression tree (sound, not necessarily tight).
Interval interval_eval(const ExprNode& node, const Interval& arg);

// Bounds every observable of `fd` over the input box. Non-input intervals are
// widened by `inflation` relative to their magnitude (at least absolute
// `inflation`), never beyond the primitive's codomain. Domain violations are
// reported with the observable index.
std::vector<Interval> propagate(const FunctionalDecomposition& fd, std::span<const Interval> domain, double inflation = 1e-9);

} // namespace funcdec
