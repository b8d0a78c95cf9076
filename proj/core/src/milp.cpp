#include "milp.hpp"

#include "funcdec/error.hpp"
#include "lp.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <deque>
#include <limits>

namespace funcdec::detail {

namespace {

// A convexity group is a row  sum_{i in S} a*xi_i = a*(2-|S|)  over continuous
// variables in [-1,1]: with lambda_i = (xi_i+1)/2 it reads sum lambda_i = 1.
// Inside other rows the group's joint contribution is bounded by a
// fractional knapsack over lambda, which is much tighter than summing the
// members' independent ranges.
struct GroupPart {
    int group = -1;
    std::vector<std::pair<int, double>> members; // every group member, coefficient in this row, sorted descending
    double coeff_sum = 0.0;
};

struct RowInfo {
    std::vector<std::pair<int, double>> plain;
    std::vector<GroupPart> parts;
};

bool uniform_row(const SparseRow& r, const std::vector<char>& binary, bool want_binary, const std::vector<double>& lo,
                 const std::vector<double>& hi) {
    if (r.idx.size() < 2) return false;
    const double a = r.val[0];
    if (a == 0.0) return false;
    for (std::size_t t = 0; t < r.idx.size(); ++t) {
        const int k = r.idx[t];
        if (std::abs(r.val[t] - a) > 1e-12 * std::abs(a)) return false;
        if ((binary[k] != 0) != want_binary) return false;
        if (!want_binary && (lo[k] != -1.0 || hi[k] != 1.0)) return false;
    }
    const double expect = a * (2.0 - static_cast<double>(r.idx.size()));
    return std::abs(r.rhs - expect) <= 1e-12 * std::max(1.0, std::abs(expect));
}

class LeafImpl;

class Engine {
public:
    Engine(const MilpProblem& p, const SearchConfig& cfg, const std::function<bool(const Leaf&)>& visit)
        : cfg_(cfg), visit_(visit), lo_(p.lo), hi_(p.hi), binary_(p.binary), n_(static_cast<int>(p.lo.size())) {
        rows_.reserve(p.rows.size());
        for (const auto& r : p.rows) {
            SparseRow s;
            double scale = 0.0;
            for (std::size_t t = 0; t < r.idx.size(); ++t) {
                if (r.val[t] == 0.0) continue;
                if (r.idx[t] < 0 || r.idx[t] >= n_) throw DimensionError("constraint references an unknown variable");
                s.idx.push_back(r.idx[t]);
                s.val.push_back(r.val[t]);
                scale = std::max(scale, std::abs(r.val[t]));
            }
            s.rhs = r.rhs;
            if (scale > 0.0) {
                for (auto& v : s.val) v /= scale;
                s.rhs /= scale;
            }
            rows_.push_back(std::move(s));
        }
        for (int k = 0; k < n_; ++k) {
            if (binary_[k]) {
                lo_[k] = std::max(lo_[k], -1.0);
                hi_[k] = std::min(hi_[k], 1.0);
            }
        }
        var_rows_.assign(n_, {});
        for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
            for (int k : rows_[r].idx) var_rows_[k].push_back(r);
        }
        detect_groups();
        build_row_info();
    }

    SearchStats run() {
        in_queue_.assign(rows_.size(), 0);
        for (int r = 0; r < static_cast<int>(rows_.size()); ++r) enqueue(r);
        if (!propagate()) return stats_;
        if (cfg_.lp_prune && !sub_lp()) return stats_;
        dfs();
        return stats_;
    }

    std::optional<double> minimize_current(const std::vector<double>& cost) {
        const auto res = solve_current(all_rows(), &cost);
        if (!res) return std::nullopt;
        return res;
    }

private:
    friend class LeafImpl;

    // ----------------------------------------------------------- groups
    void detect_groups() {
        onehot_of_.assign(n_, -1);
        convex_of_.assign(n_, -1);
        convex_row_.clear();
        for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
            const auto& row = rows_[r];
            const bool all_free = std::all_of(row.idx.begin(), row.idx.end(), [&](int k) { return onehot_of_[k] < 0 && convex_of_[k] < 0; });
            if (!all_free) continue;
            if (uniform_row(row, binary_, true, lo_, hi_)) {
                for (int k : row.idx) onehot_of_[k] = static_cast<int>(onehot_.size());
                onehot_.push_back(row.idx);
            } else if (uniform_row(row, binary_, false, lo_, hi_)) {
                for (int k : row.idx) convex_of_[k] = static_cast<int>(convex_.size());
                convex_.push_back(row.idx);
                convex_row_.push_back(r);
            }
        }
        // Remaining binaries branch in order of decreasing column norm.
        std::vector<std::pair<double, int>> loose;
        for (int k = 0; k < n_; ++k) {
            if (!binary_[k] || onehot_of_[k] >= 0) continue;
            double norm = 0.0;
            for (int r : var_rows_[k]) {
                const auto& row = rows_[r];
                for (std::size_t t = 0; t < row.idx.size(); ++t) {
                    if (row.idx[t] == k) norm += row.val[t] * row.val[t];
                }
            }
            loose.emplace_back(-norm, k);
        }
        std::sort(loose.begin(), loose.end());
        for (const auto& [neg, k] : loose) loose_.push_back(k);
    }

    void build_row_info() {
        info_.assign(rows_.size(), {});
        for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
            const auto& row = rows_[r];
            auto& inf = info_[r];
            std::vector<int> part_of(convex_.size(), -1);
            for (std::size_t t = 0; t < row.idx.size(); ++t) {
                const int k = row.idx[t];
                const int g = convex_of_[k];
                if (g < 0 || convex_row_[g] == r) {
                    inf.plain.emplace_back(k, row.val[t]);
                    continue;
                }
                if (part_of[g] < 0) {
                    part_of[g] = static_cast<int>(inf.parts.size());
                    GroupPart gp;
                    gp.group = g;
                    for (int m : convex_[g]) gp.members.emplace_back(m, 0.0);
                    inf.parts.push_back(std::move(gp));
                }
                auto& gp = inf.parts[part_of[g]];
                for (auto& [m, a] : gp.members) {
                    if (m == k) a += row.val[t];
                }
            }
            for (auto& gp : inf.parts) {
                std::sort(gp.members.begin(), gp.members.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
                for (const auto& [m, a] : gp.members) gp.coeff_sum += a;
            }
        }
    }

    // ------------------------------------------------------ propagation
    struct Range {
        double lo, hi;
    };

    Range term_range(int k, double a) const {
        const double x = a * lo_[k], y = a * hi_[k];
        return {std::min(x, y), std::max(x, y)};
    }

    Range plain_range(const GroupPart& gp) const {
        Range r{0.0, 0.0};
        for (const auto& [m, a] : gp.members) {
            if (a == 0.0) continue;
            const auto t = term_range(m, a);
            r.lo += t.lo;
            r.hi += t.hi;
        }
        return r;
    }

    Range knapsack_range(const GroupPart& gp, const Range& plain) const {
        double base = 0.0, mass = 1.0, cap = 0.0;
        for (const auto& [m, a] : gp.members) {
            const double l = 0.5 * (lo_[m] + 1.0);
            base += a * l;
            mass -= l;
            cap += 0.5 * (hi_[m] - lo_[m]);
        }
        if (mass < -1e-9 || mass > cap + 1e-9) return plain;
        mass = std::clamp(mass, 0.0, cap);
        double hi = base, rem = mass;
        for (const auto& [m, a] : gp.members) {
            if (rem <= 0.0) break;
            const double take = std::min(rem, 0.5 * (hi_[m] - lo_[m]));
            hi += a * take;
            rem -= take;
        }
        double lo = base;
        rem = mass;
        for (auto it = gp.members.rbegin(); it != gp.members.rend() && rem > 0.0; ++it) {
            const double take = std::min(rem, 0.5 * (hi_[it->first] - lo_[it->first]));
            lo += it->second * take;
            rem -= take;
        }
        Range r{2.0 * lo - gp.coeff_sum, 2.0 * hi - gp.coeff_sum};
        r.lo = std::max(r.lo, plain.lo);
        r.hi = std::min(r.hi, plain.hi);
        return r;
    }

    void enqueue(int r) {
        if (in_queue_[r]) return;
        in_queue_[r] = 1;
        queue_.push_back(r);
    }

    void clear_queue() {
        for (int r : queue_) in_queue_[r] = 0;
        queue_.clear();
    }

    // Narrows x_k to [nl, nh] (already derived from a row that passed its
    // feasibility check, so any crossing is within tolerance).
    void tighten(int k, double nl, double nh) {
        double l = lo_[k], h = hi_[k];
        if (binary_[k]) {
            if (nl > -1.0 + cfg_.feas_tol && l < 1.0) l = 1.0;
            if (nh < 1.0 - cfg_.feas_tol && h > -1.0) h = -1.0;
            if (l > h) {
                conflict_ = true;
                return;
            }
        } else {
            const double thr = 1e-9 * (h - l) + 1e-14;
            if (nl > l + thr) l = std::min(nl, h);
            if (nh < h - thr) h = std::max(nh, l);
        }
        if (l == lo_[k] && h == hi_[k]) return;
        trail_.push_back({k, lo_[k], hi_[k]});
        lo_[k] = l;
        hi_[k] = h;
        for (int r : var_rows_[k]) enqueue(r);
    }

    bool propagate_row(int r) {
        const auto& row = rows_[r];
        const auto& inf = info_[r];
        double mn = 0.0, mx = 0.0;
        part_plain_.resize(inf.parts.size());
        part_agg_.resize(inf.parts.size());
        for (const auto& [k, a] : inf.plain) {
            const auto t = term_range(k, a);
            mn += t.lo;
            mx += t.hi;
        }
        for (std::size_t p = 0; p < inf.parts.size(); ++p) {
            part_plain_[p] = plain_range(inf.parts[p]);
            part_agg_[p] = knapsack_range(inf.parts[p], part_plain_[p]);
            mn += part_agg_[p].lo;
            mx += part_agg_[p].hi;
        }
        const double tol = cfg_.feas_tol;
        if (mn > row.rhs + tol || mx < row.rhs - tol) return false;
        auto bound = [&](int k, double a, double others_lo, double others_hi) {
            const double l = (row.rhs - others_hi) / a, h = (row.rhs - others_lo) / a;
            tighten(k, std::min(l, h), std::max(l, h));
        };
        for (const auto& [k, a] : inf.plain) {
            const auto t = term_range(k, a);
            bound(k, a, mn - t.lo, mx - t.hi);
            if (conflict_) return false;
        }
        for (std::size_t p = 0; p < inf.parts.size(); ++p) {
            for (const auto& [m, a] : inf.parts[p].members) {
                if (a == 0.0) continue;
                const auto t = term_range(m, a);
                bound(m, a, mn - part_agg_[p].lo + part_plain_[p].lo - t.lo, mx - part_agg_[p].hi + part_plain_[p].hi - t.hi);
                if (conflict_) return false;
            }
        }
        return true;
    }

    bool propagate() {
        conflict_ = false;
        std::size_t budget = 40 * rows_.size() + 1000;
        while (!queue_.empty()) {
            const int r = queue_.front();
            queue_.pop_front();
            in_queue_[r] = 0;
            if (!propagate_row(r)) {
                clear_queue();
                return false;
            }
            if (--budget == 0) {
                clear_queue();
                break;
            }
        }
        return true;
    }

    void restore(std::size_t mark) {
        while (trail_.size() > mark) {
            const auto& e = trail_.back();
            lo_[e.k] = e.lo;
            hi_[e.k] = e.hi;
            trail_.pop_back();
        }
    }

    bool fix(int k, double v) {
        if (v < lo_[k] || v > hi_[k]) return false;
        if (lo_[k] == v && hi_[k] == v) return true;
        trail_.push_back({k, lo_[k], hi_[k]});
        lo_[k] = hi_[k] = v;
        for (int r : var_rows_[k]) enqueue(r);
        return true;
    }

    // ---------------------------------------------------------------- LP
    std::vector<int> all_rows() const {
        std::vector<int> r(rows_.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<int>(i);
        return r;
    }

    // Feasibility (cost == nullptr) or minimum of cost'x under the current
    // bounds restricted to `rows`. nullopt when infeasible.
    std::optional<double> solve_current(const std::vector<int>& rows, const std::vector<double>* cost) {
        std::vector<int> col(n_, -1);
        std::vector<int> free_vars;
        double constant = 0.0;
        auto is_free = [&](int k) { return lo_[k] < hi_[k]; };
        std::vector<int> live_rows;
        std::vector<double> rhs;
        for (int r : rows) {
            const auto& row = rows_[r];
            double b = row.rhs;
            bool any = false;
            for (std::size_t t = 0; t < row.idx.size(); ++t) {
                const int k = row.idx[t];
                if (is_free(k)) {
                    any = true;
                } else {
                    b -= row.val[t] * lo_[k];
                }
            }
            if (!any) {
                if (std::abs(b) > cfg_.feas_tol) return std::nullopt;
                continue;
            }
            live_rows.push_back(r);
            rhs.push_back(b);
            for (int k : row.idx) {
                if (is_free(k) && col[k] < 0) {
                    col[k] = static_cast<int>(free_vars.size());
                    free_vars.push_back(k);
                }
            }
        }
        if (cost) {
            for (int k = 0; k < n_; ++k) {
                if ((*cost)[k] == 0.0) continue;
                if (is_free(k)) {
                    if (col[k] < 0) {
                        col[k] = static_cast<int>(free_vars.size());
                        free_vars.push_back(k);
                    }
                } else {
                    constant += (*cost)[k] * lo_[k];
                }
            }
        }
        const auto nf = static_cast<Eigen::Index>(free_vars.size());
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(live_rows.size()), nf);
        Eigen::VectorXd b(static_cast<Eigen::Index>(live_rows.size())), l(nf), h(nf), c;
        for (std::size_t i = 0; i < live_rows.size(); ++i) {
            const auto& row = rows_[live_rows[i]];
            for (std::size_t t = 0; t < row.idx.size(); ++t) {
                const int k = row.idx[t];
                if (col[k] >= 0) A(static_cast<Eigen::Index>(i), col[k]) += row.val[t];
            }
            b(static_cast<Eigen::Index>(i)) = rhs[i];
        }
        for (Eigen::Index j = 0; j < nf; ++j) {
            l(j) = lo_[free_vars[j]];
            h(j) = hi_[free_vars[j]];
        }
        if (cost) {
            c.resize(nf);
            for (Eigen::Index j = 0; j < nf; ++j) c(j) = (*cost)[free_vars[j]];
        }
        LpOptions opt;
        opt.feas_tol = cfg_.feas_tol;
        ++stats_.lp_solves;
        const auto res = solve_lp(A, b, l, h, c, opt);
        if (res.status == LpStatus::IterationLimit) throw SolverError("linear program did not converge within the iteration limit");
        if (res.status == LpStatus::Infeasible) return std::nullopt;
        return constant + res.objective;
    }

    // LP over the rows that touch neither an unfixed binary nor a continuous
    // variable sharing a row with one. Any subset of rows is a relaxation.
    bool sub_lp() {
        std::vector<char> tainted(n_, 0);
        bool any_open = false;
        for (int k = 0; k < n_; ++k) {
            if (binary_[k] && lo_[k] < hi_[k]) {
                any_open = true;
                tainted[k] = 1;
                for (int r : var_rows_[k]) {
                    for (int v : rows_[r].idx) tainted[v] = 1;
                }
            }
        }
        if (!any_open) return true; // the leaf LP follows immediately
        std::vector<int> rows;
        for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
            const auto& row = rows_[r];
            bool clean = true, has_free = false;
            for (int k : row.idx) {
                if (tainted[k]) {
                    clean = false;
                    break;
                }
                has_free = has_free || lo_[k] < hi_[k];
            }
            if (clean && has_free) rows.push_back(r);
        }
        if (rows.empty()) return true;
        return solve_current(rows, nullptr).has_value();
    }

    // ------------------------------------------------------------ search
    bool dfs();
    bool leaf();

    bool try_branch(const std::vector<std::pair<int, double>>& fixes) {
        const std::size_t mark = trail_.size();
        bool ok = true;
        for (const auto& [k, v] : fixes) {
            if (!fix(k, v)) {
                ok = false;
                break;
            }
        }
        ok = ok && propagate();
        if (!ok) clear_queue();
        if (ok && cfg_.lp_prune) ok = sub_lp();
        bool keep_going = true;
        if (ok) keep_going = dfs();
        restore(mark);
        return keep_going;
    }

    struct TrailEntry {
        int k;
        double lo, hi;
    };

    SearchConfig cfg_;
    const std::function<bool(const Leaf&)>& visit_;
    std::vector<double> lo_, hi_;
    std::vector<char> binary_;
    int n_;
    std::vector<SparseRow> rows_;
    std::vector<std::vector<int>> var_rows_;
    std::vector<std::vector<int>> onehot_, convex_;
    std::vector<int> onehot_of_, convex_of_, convex_row_, loose_;
    std::vector<RowInfo> info_;
    std::vector<Range> part_plain_, part_agg_;
    std::deque<int> queue_;
    std::vector<char> in_queue_;
    std::vector<TrailEntry> trail_;
    bool conflict_ = false;
    SearchStats stats_;
};

class LeafImpl final : public Leaf {
public:
    explicit LeafImpl(Engine& e) : e_(e) {}
    std::optional<double> minimize(const std::vector<double>& cost) const override {
        if (cost.size() != static_cast<std::size_t>(e_.n_)) throw DimensionError("leaf objective has the wrong length");
        return e_.solve_current(e_.all_rows(), &cost);
    }

private:
    Engine& e_;
};

bool Engine::leaf() {
    if (!solve_current(all_rows(), nullptr)) return true;
    ++stats_.leaves;
    LeafImpl view(*this);
    return visit_(view);
}

bool Engine::dfs() {
    if (++stats_.nodes > cfg_.max_nodes) {
        throw BudgetError("binary search budget of " + std::to_string(cfg_.max_nodes) + " nodes exhausted", stats_.leaves);
    }
    int best = -1;
    int best_open = INT_MAX;
    for (int g = 0; g < static_cast<int>(onehot_.size()); ++g) {
        int open = 0;
        bool chosen = false;
        for (int k : onehot_[g]) {
            if (lo_[k] == 1.0) chosen = true;
            if (hi_[k] == 1.0) ++open;
        }
        if (chosen) {
            bool rest_fixed = true;
            for (int k : onehot_[g]) rest_fixed = rest_fixed && lo_[k] == hi_[k];
            if (rest_fixed) continue;
        }
        if (open == 0) return true; // infeasible: no option left
        if (open < best_open) {
            best_open = open;
            best = g;
        }
    }
    if (best >= 0) {
        const auto& members = onehot_[best];
        for (int k : members) {
            if (hi_[k] != 1.0) continue;
            std::vector<std::pair<int, double>> fixes;
            for (int o : members) fixes.emplace_back(o, o == k ? 1.0 : -1.0);
            if (!try_branch(fixes)) return false;
        }
        return true;
    }
    for (int k : loose_) {
        if (lo_[k] == hi_[k]) continue;
        if (!try_branch({{k, -1.0}})) return false;
        return try_branch({{k, 1.0}});
    }
    return leaf();
}

} // namespace

SearchStats search(const MilpProblem& problem, const SearchConfig& cfg, const std::function<bool(const Leaf&)>& visit) {
    if (problem.hi.size() != problem.lo.size() || problem.binary.size() != problem.lo.size()) {
        throw DimensionError("inconsistent variable arrays");
    }
    for (std::size_t k = 0; k < problem.lo.size(); ++k) {
        if (!(problem.lo[k] <= problem.hi[k]) || !std::isfinite(problem.lo[k]) || !std::isfinite(problem.hi[k])) {
            throw DimensionError("variable bounds must be finite and ordered");
        }
    }
    Engine e(problem, cfg, visit);
    return e.run();
}

} // namespace funcdec::detail
