#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace funcdec::detail {

struct SparseRow {
    std::vector<int> idx;
    std::vector<double> val;
    double rhs = 0.0;
};

// Feasibility problem  rows: sum val*x[idx] = rhs,  lo <= x <= hi, and
// binary variables restricted to {-1, 1}.
struct MilpProblem {
    std::vector<double> lo, hi;
    std::vector<char> binary;
    std::vector<SparseRow> rows;

    int add_var(double l, double h, bool is_binary = false) {
        lo.push_back(l);
        hi.push_back(h);
        binary.push_back(is_binary ? 1 : 0);
        return static_cast<int>(lo.size()) - 1;
    }
};

struct SearchConfig {
    double feas_tol = 1e-7;
    std::size_t max_nodes = 2'000'000;
    bool lp_prune = true;
};

struct SearchStats {
    std::size_t nodes = 0;
    std::size_t leaves = 0;
    std::size_t lp_solves = 0;
};

// A feasible leaf: every binary fixed and the continuous part feasible.
class Leaf {
public:
    virtual ~Leaf() = default;
    // min cost'x over this leaf (cost indexed like the problem variables).
    virtual std::optional<double> minimize(const std::vector<double>& cost) const = 0;
};

// Depth-first enumeration of feasible binary assignments with propagation and
// LP pruning. `visit` returns false to stop early. Throws BudgetError when
// the node budget runs out (lower bound = leaves found) and SolverError when
// an LP fails to converge.
SearchStats search(const MilpProblem& problem, const SearchConfig& cfg, const std::function<bool(const Leaf&)>& visit);

} // namespace funcdec::detail
