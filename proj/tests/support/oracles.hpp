#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's algorithms; they re-derive the expected values by
// brute force or by a second, simpler implementation.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Recursive-descent evaluator for the infix grammar.
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          (right associative through unary)
//   atom  := number | name | name '(' expr ')' | '(' expr ')'

class RefEvaluator {
public:
    RefEvaluator(std::string src, std::map<std::string, double> vars) : s_(std::move(src)), vars_(std::move(vars)) {}

    double run() {
        const double v = expr();
        skip();
        if (p_ != s_.size()) throw std::runtime_error("trailing input");
        return v;
    }

private:
    std::string s_;
    std::map<std::string, double> vars_;
    std::size_t p_ = 0;

    void skip() {
        while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
    }
    bool eat(char c) {
        skip();
        if (p_ < s_.size() && s_[p_] == c) {
            ++p_;
            return true;
        }
        return false;
    }
    double expr() {
        double v = term();
        for (;;) {
            if (eat('+')) {
                v += term();
            } else if (eat('-')) {
                v -= term();
            } else {
                return v;
            }
        }
    }
    double term() {
        double v = unary();
        for (;;) {
            if (eat('*')) {
                v *= unary();
            } else if (eat('/')) {
                v /= unary();
            } else {
                return v;
            }
        }
    }
    double unary() {
        if (eat('-')) return -unary();
        return power();
    }
    double power() {
        const double base = atom();
        if (eat('^')) return std::pow(base, unary());
        return base;
    }
    static double call(const std::string& f, double x) {
        if (f == "sin") return std::sin(x);
        if (f == "cos") return std::cos(x);
        if (f == "tan") return std::tan(x);
        if (f == "exp") return std::exp(x);
        if (f == "log") return std::log(x);
        if (f == "sqrt") return std::sqrt(x);
        if (f == "abs") return std::fabs(x);
        if (f == "tanh") return std::tanh(x);
        if (f == "sig") return 1.0 / (1.0 + std::exp(-x));
        if (f == "hardsig") return x < -2.5 ? 0.0 : (x > 2.5 ? 1.0 : 0.2 * x + 0.5);
        if (f == "step") return x >= 0.0 ? 1.0 : 0.0;
        if (f == "sq") return x * x;
        throw std::runtime_error("unknown function " + f);
    }
    double atom() {
        skip();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) throw std::runtime_error("expected )");
            return v;
        }
        if (p_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '.')) {
            std::size_t used = 0;
            const double v = std::stod(s_.substr(p_), &used);
            p_ += used;
            return v;
        }
        std::string name;
        while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) name += s_[p_++];
        if (name.empty()) throw std::runtime_error("expected operand");
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) throw std::runtime_error("expected )");
            return call(name, v);
        }
        return vars_.at(name);
    }
};

inline double ref_eval(const std::string& src, const std::map<std::string, double>& vars) {
    return RefEvaluator(src, vars).run();
}

// Random well-formed expressions over `vars` whose value is finite for any
// assignment in [-2, 2]: logs and roots see arguments >= 0.5, divisors are
// >= 1 in magnitude, exponentials see bounded arguments.
class ExprGenerator {
public:
    ExprGenerator(std::vector<std::string> vars, std::uint64_t seed) : vars_(std::move(vars)), rng_(seed) {}

    std::string next(int depth = 4) { return gen(depth); }

private:
    std::vector<std::string> vars_;
    std::mt19937_64 rng_;

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::string leaf() {
        if (pick(4) == 0) {
            static const char* consts[] = {"2", "0.5", "3", "1.25", "7"};
            return consts[pick(5)];
        }
        return vars_[static_cast<std::size_t>(pick(static_cast<int>(vars_.size())))];
    }

    std::string gen(int depth) {
        if (depth <= 0) return leaf();
        const std::string a = gen(depth - 1);
        switch (pick(16)) {
        case 0: return a + "+" + gen(depth - 1);
        case 1: return a + "-" + gen(depth - 1);
        case 2: return a + "*" + gen(depth - 1);
        case 3: return "(" + a + ")*(" + gen(depth - 1) + ")";
        case 4: return "(" + a + ")/(sq(" + gen(depth - 1) + ")+1)";
        case 5: return "sin(" + a + ")";
        case 6: return "cos(" + a + ")";
        case 7: return "tanh(" + a + ")";
        case 8: return "sig(" + a + ")";
        case 9: return "hardsig(" + a + ")";
        case 10: return "-(" + a + ")";
        case 11: return "(sin(" + a + "))^" + std::to_string(2 + pick(2));
        case 12: return "log(abs(" + a + ")+0.5)";
        case 13: return "sqrt(abs(" + a + ")+0.5)";
        case 14: return "exp(cos(" + a + "))";
        default: return "(" + a + "+" + gen(depth - 1) + ")*" + leaf();
        }
    }
};

// ---------------------------------------------------------------------------
// Graph oracles over adjacency lists (succ[v] = successors of v).

using Adj = std::vector<std::vector<std::size_t>>;

inline Adj transpose(const Adj& succ) {
    Adj pred(succ.size());
    for (std::size_t v = 0; v < succ.size(); ++v) {
        for (auto u : succ[v]) pred[u].push_back(v);
    }
    return pred;
}

// Intersection of the vertex sets of all maximal walks from v (walks that
// end at a vertex with no successors), v excluded. Exponential; small graphs.
inline std::set<std::size_t> walk_intersection(const Adj& succ, std::size_t v) {
    std::set<std::size_t> acc;
    bool first = true;
    std::vector<std::size_t> path;
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
        path.push_back(u);
        if (succ[u].empty()) {
            std::set<std::size_t> seen(path.begin() + 1, path.end());
            if (first) {
                acc = seen;
                first = false;
            } else {
                std::set<std::size_t> keep;
                std::set_intersection(acc.begin(), acc.end(), seen.begin(), seen.end(), std::inserter(keep, keep.begin()));
                acc = std::move(keep);
            }
        }
        for (auto w : succ[u]) dfs(w);
        path.pop_back();
    };
    dfs(v);
    acc.erase(v);
    return acc;
}

// u post-dominates v (relative to walks starting at v) iff removing u cuts
// v off from every sink it could otherwise reach.
inline std::set<std::size_t> dominator_set(const Adj& succ, std::size_t v) {
    std::set<std::size_t> out;
    for (std::size_t u = 0; u < succ.size(); ++u) {
        if (u == v) continue;
        std::vector<char> seen(succ.size(), 0);
        std::vector<std::size_t> stack = {v};
        seen[v] = 1;
        bool reaches_sink = false, reaches_u = false;
        // First: is u reachable at all?
        {
            std::vector<char> s2(succ.size(), 0);
            std::vector<std::size_t> st = {v};
            s2[v] = 1;
            while (!st.empty()) {
                auto x = st.back();
                st.pop_back();
                if (x == u) reaches_u = true;
                for (auto w : succ[x]) {
                    if (!s2[w]) {
                        s2[w] = 1;
                        st.push_back(w);
                    }
                }
            }
        }
        if (!reaches_u) continue;
        while (!stack.empty()) {
            auto x = stack.back();
            stack.pop_back();
            if (succ[x].empty()) reaches_sink = true;
            for (auto w : succ[x]) {
                if (w != u && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        if (!reaches_sink) out.insert(u);
    }
    return out;
}

// Random DAG on n vertices with randomly permuted labels.
inline Adj random_dag(std::size_t n, double p, std::mt19937_64& rng) {
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = i;
    std::shuffle(label.begin(), label.end(), rng);
    std::bernoulli_distribution edge(p);
    Adj succ(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (edge(rng)) succ[label[i]].push_back(label[j]);
        }
    }
    for (auto& s : succ) std::sort(s.begin(), s.end());
    return succ;
}

// ---------------------------------------------------------------------------
// Plain-loop LSTM step: z = (h_prev, x), gates with hard-sigmoid, state tanh.

struct LstmWeights {
    std::size_t N = 0, d = 0;
    std::vector<std::vector<double>> Wf, Wi, Wc, Wo;   // N rows of N + d
    std::vector<double> bf, bi, bc, bo;
};

inline double hardsig(double x) { return std::min(1.0, std::max(0.0, 0.2 * x + 0.5)); }

inline void lstm_direct(const LstmWeights& w, const std::vector<double>& x, const std::vector<double>& h,
                        const std::vector<double>& c, std::vector<double>& h_out, std::vector<double>& c_out) {
    std::vector<double> z(h);
    z.insert(z.end(), x.begin(), x.end());
    auto row = [&](const std::vector<std::vector<double>>& W, const std::vector<double>& b, std::size_t r) {
        double s = b[r];
        for (std::size_t k = 0; k < z.size(); ++k) s += W[r][k] * z[k];
        return s;
    };
    h_out.assign(w.N, 0.0);
    c_out.assign(w.N, 0.0);
    for (std::size_t r = 0; r < w.N; ++r) {
        const double f = hardsig(row(w.Wf, w.bf, r));
        const double i = hardsig(row(w.Wi, w.bi, r));
        const double g = std::tanh(row(w.Wc, w.bc, r));
        const double o = hardsig(row(w.Wo, w.bo, r));
        c_out[r] = f * c[r] + i * g;
        h_out[r] = o * std::tanh(c_out[r]);
    }
}

// ---------------------------------------------------------------------------
// Three-mode automaton traced directly from its event generator, mode
// selector and switched affine system.

struct DhaTrace {
    int mode;
    double next;
};

inline DhaTrace dha_trace(double x, double u) {
    const bool d1 = x >= 0.0;
    const bool d2 = x + u - 1.0 >= 0.0;
    if (d1) return {2, 2.0 * x};
    if (d2) return {3, 2.0};
    return {1, x + u - 1.0};
}

// ---------------------------------------------------------------------------
// Sampling helpers.

inline std::vector<double> uniform_box(const std::vector<std::pair<double, double>>& box, std::mt19937_64& rng) {
    std::vector<double> p;
    for (const auto& [lo, hi] : box) p.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
    return p;
}

} // namespace oracle
