#include "lp.hpp"

#include <cmath>
#include <limits>

namespace funcdec::detail {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

class Simplex {
public:
    Simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
            const LpOptions& opt)
        : m_(A.rows()), n_(A.cols()), N_(n_ + m_), opt_(opt), T_(m_ + 1, N_ + 1), lo_(N_), hi_(N_), x_(N_),
          state_(N_), basis_(m_) {
        constexpr double big = std::numeric_limits<double>::infinity();
        lo_.head(n_) = lo;
        hi_.head(n_) = hi;
        lo_.tail(m_).setZero();
        hi_.tail(m_).setConstant(big);
        for (Eigen::Index j = 0; j < n_; ++j) {
            x_(j) = std::abs(lo(j)) <= std::abs(hi(j)) ? lo(j) : hi(j);
            state_[j] = x_(j) == lo(j) ? VarState::AtLower : VarState::AtUpper;
        }
        T_.setZero();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double scale = std::max(A.row(i).cwiseAbs().maxCoeff(), 1e-300);
            const double bi = b(i) / scale;
            double r = bi;
            for (Eigen::Index j = 0; j < n_; ++j) r -= A(i, j) / scale * x_(j);
            const double s = r >= 0 ? 1.0 : -1.0;
            for (Eigen::Index j = 0; j < n_; ++j) T_(i, j) = s * A(i, j) / scale;
            T_(i, n_ + i) = 1.0;
            basis_[i] = n_ + i;
            state_[n_ + i] = VarState::Basic;
            x_(n_ + i) = std::abs(r);
        }
    }

    // Phase 1. True when a point within tolerance was found.
    bool phase1() {
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(N_);
        cost.tail(m_).setOnes();
        set_objective(cost);
        if (!iterate()) return false;
        infeasibility_ = x_.tail(m_).sum();
        if (infeasibility_ > opt_.feas_tol) return false;
        for (Eigen::Index i = 0; i < m_; ++i) hi_(n_ + i) = 0.0;
        return true;
    }

    bool phase2(const Eigen::VectorXd& c) {
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(N_);
        cost.head(n_) = c;
        set_objective(cost);
        return iterate();
    }

    Eigen::VectorXd solution() const { return x_.head(n_); }
    double infeasibility() const { return infeasibility_; }
    bool hit_limit() const { return hit_limit_; }

private:
    void set_objective(const Eigen::VectorXd& cost) {
        cost_ = cost;
        auto d = T_.row(m_);
        d.head(N_) = cost.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = cost(basis_[i]);
            if (cb != 0.0) d.head(N_) -= cb * T_.row(i).head(N_);
        }
    }

    // Runs simplex iterations on the current objective row. False on iteration limit.
    bool iterate() {
        std::size_t degenerate = 0;
        bool bland = false;
        for (std::size_t it = 0; it < opt_.max_iter; ++it) {
            const Eigen::Index q = choose_entering(bland);
            if (q < 0) return true;
            const double delta = state_[q] == VarState::AtLower ? 1.0 : -1.0;

            double t_best = hi_(q) - lo_(q);
            Eigen::Index r = -1;
            double best_alpha = 0.0;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double alpha = T_(i, q);
                if (std::abs(alpha) < opt_.pivot_tol) continue;
                const double g = delta * alpha;
                const Eigen::Index bv = basis_[i];
                double lim = g > 0 ? (x_(bv) - lo_(bv)) / g : (hi_(bv) - x_(bv)) / (-g);
                if (lim < 0) lim = 0;
                // Near-ties go to the larger pivot element; a tie with the
                // bound flip prefers the pivot.
                const bool better = lim < t_best - 1e-12;
                const bool tie = lim <= t_best + 1e-12 && (r < 0 || std::abs(alpha) > std::abs(best_alpha));
                if (better || tie) {
                    t_best = std::min(t_best, lim);
                    r = i;
                    best_alpha = alpha;
                }
            }
            if (!std::isfinite(t_best)) return true; // unbounded direction: cannot happen with finite bounds
            if (t_best <= 1e-12) {
                if (++degenerate > 50) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
            x_(q) += delta * t_best;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double alpha = T_(i, q);
                if (alpha != 0.0) x_(basis_[i]) -= delta * alpha * t_best;
            }
            if (r < 0) {
                state_[q] = state_[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
                x_(q) = state_[q] == VarState::AtLower ? lo_(q) : hi_(q);
                continue;
            }
            const Eigen::Index leaving = basis_[r];
            const double g = delta * best_alpha;
            state_[leaving] = g > 0 ? VarState::AtLower : VarState::AtUpper;
            x_(leaving) = g > 0 ? lo_(leaving) : hi_(leaving);
            pivot(r, q);
            basis_[r] = q;
            state_[q] = VarState::Basic;
        }
        hit_limit_ = true;
        return false;
    }

    Eigen::Index choose_entering(bool bland) const {
        Eigen::Index q = -1;
        double best = 0.0;
        for (Eigen::Index j = 0; j < N_; ++j) {
            if (state_[j] == VarState::Basic || lo_(j) == hi_(j)) continue;
            const double d = T_(m_, j);
            double score = 0.0;
            if (state_[j] == VarState::AtLower && d < -opt_.opt_tol) score = -d;
            if (state_[j] == VarState::AtUpper && d > opt_.opt_tol) score = d;
            if (score <= 0.0) continue;
            if (bland) return j;
            if (score > best) {
                best = score;
                q = j;
            }
        }
        return q;
    }

    void pivot(Eigen::Index r, Eigen::Index q) {
        const double a = T_(r, q);
        T_.row(r) /= a;
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = T_(i, q);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
    }

    Eigen::Index m_, n_, N_;
    LpOptions opt_;
    RowMat T_;
    Eigen::VectorXd lo_, hi_, x_, cost_;
    std::vector<VarState> state_;
    std::vector<Eigen::Index> basis_;
    double infeasibility_ = 0.0;
    bool hit_limit_ = false;
};

} // namespace

LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                  const Eigen::VectorXd& c, const LpOptions& opt) {
    LpResult res;
    if (A.rows() == 0) {
        res.x = lo;
        if (c.size() == lo.size()) {
            for (Eigen::Index j = 0; j < lo.size(); ++j) res.x(j) = c(j) >= 0 ? lo(j) : hi(j);
            res.objective = c.dot(res.x);
        }
        res.status = LpStatus::Optimal;
        return res;
    }
    Simplex s(A, b, lo, hi, opt);
    const bool feasible = s.phase1();
    res.infeasibility = s.infeasibility();
    if (s.hit_limit()) {
        res.status = LpStatus::IterationLimit;
        return res;
    }
    if (!feasible) {
        res.status = LpStatus::Infeasible;
        return res;
    }
    if (c.size() == A.cols()) {
        s.phase2(c);
        if (s.hit_limit()) {
            res.status = LpStatus::IterationLimit;
            return res;
        }
    }
    res.x = s.solution();
    res.objective = c.size() == A.cols() ? c.dot(res.x) : 0.0;
    res.status = LpStatus::Optimal;
    return res;
}

} // namespace funcdec::detail
