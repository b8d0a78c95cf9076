// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures (capped at 1).

#include <funcdec/funcdec.hpp>

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace funcdec;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;
const char* kNested = "cos(sin(x1*x2))+sin(cos(sin(x1*x2)))+sin(x1*x2)";

struct Check {
    std::ostringstream why;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            why << (why.tellp() > 0 ? "; " : "") << what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", id, title, secs, c.ok ? "" : ": ", c.why.str().c_str());
    std::fflush(stdout);
    failures += c.ok ? 0 : 1;
}

bool same(const ObservableExpr& a, const ObservableExpr& b) { return a.canonical_key() == b.canonical_key(); }
ExprPtr tree(const char* src) { return tree_from_rpn(parse(src), "w"); }

std::vector<VectorXd> graph_points(const FunctionalDecomposition& fd, const std::vector<std::pair<double, double>>& box, int n,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<VectorXd> out;
    for (int k = 0; k < n; ++k) {
        const auto p = oracle::uniform_box(box, rng);
        const auto y = eval_fd(fd, p);
        VectorXd v(static_cast<Eigen::Index>(p.size() + y.size()));
        for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i];
        for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(p.size() + i)) = y[i];
        out.push_back(v);
    }
    return out;
}

// Hull of the outputs over the slice {x = x0} of a single-input graph set.
Interval output_slice(const HybridZonotope& Z, double x0) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(1, Z.dim());
    R(0, 0) = 1.0;
    const auto slice = intersect_lifted(Z, HybridZonotope::point(VectorXd::Constant(1, x0)), R);
    return interval_hull(slice)[1];
}

} // namespace

int main() {
    criterion(1, "infix to RPN conversion", [](Check& c) {
        const auto a = parse("x+y*z").to_string();
        const auto b = parse("3*y*cos(x)^2").to_string();
        c.expect(a == "x y z * +", "got '" + a + "'");
        c.expect(b == "3 y x cos 2 ^ * *", "got '" + b + "'");
    });

    criterion(2, "basic and deduplicated compilation of sin(x)+sin(x)^2", [](Check& c) {
        using OE = ObservableExpr;
        const auto rpn = parse("sin(x)+sin(x)^2");
        const auto b = decompose_basic(rpn, 1);
        c.expect(b.size() == 5, "basic size " + std::to_string(b.size()));
        if (b.size() == 5) {
            c.expect(same(b.observables[1], OE::unary(Prim::Sin, 0)) && same(b.observables[2], OE::unary(Prim::Sin, 0)), "two sines");
            c.expect(same(b.observables[3], OE::unary(Prim::Sq, 2)), "square of the second sine");
            c.expect(same(b.observables[4], OE::affine({{1, 1.0}, {3, 1.0}}, 0.0)), "sum");
        }
        const auto d = decompose_dedup(rpn, 1);
        c.expect(d.size() == 4, "dedup size " + std::to_string(d.size()));
        if (d.size() == 4) {
            c.expect(same(d.observables[1], OE::unary(Prim::Sin, 0)), "sine");
            c.expect(same(d.observables[2], OE::unary(Prim::Sq, 1)), "square");
            c.expect(same(d.observables[3], OE::affine({{1, 1.0}, {2, 1.0}}, 0.0)), "sum");
        }
    });

    criterion(3, "nested example observables and adjacency (A[i][j]=1 iff w_i feeds h_j)", [](Check& c) {
        using OE = ObservableExpr;
        const auto fd = decompose_dedup(parse(kNested), 2);
        c.expect(fd.size() == 8, "size " + std::to_string(fd.size()));
        if (fd.size() != 8) return;
        const OE want[] = {OE::binary(Prim::Mul, 0, 1), OE::unary(Prim::Sin, 2), OE::unary(Prim::Cos, 3),
                           OE::unary(Prim::Sin, 4), OE::affine({{4, 1.0}, {5, 1.0}}, 0.0), OE::affine({{3, 1.0}, {6, 1.0}}, 0.0)};
        for (std::size_t k = 0; k < 6; ++k) c.expect(same(fd.observables[k + 2], want[k]), "observable w" + std::to_string(k + 3));
        // Printed with one row per consumer; the stated convention is its transpose.
        const int printed[8][8] = {
            {0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0, 0, 0}, {0, 0, 1, 0, 0, 0, 0, 0},
            {0, 0, 0, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0}, {0, 0, 0, 1, 0, 0, 1, 0},
        };
        const auto A = build_graph(fd).adjacency();
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) {
                c.expect(A[i][j] == printed[j][i], "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            }
        }
    });

    criterion(4, "graph reduction of the nested example", [](Check& c) {
        const auto fd = decompose_dedup(parse(kNested), 2);
        const auto r = reduce(fd);
        c.expect(r.size() == 4, "size " + std::to_string(r.size()));
        if (r.size() == 4) {
            c.expect(r.observables[3].op == Prim::Composite && r.observables[3].args == std::vector<std::size_t>{2}, "composite over w3");
            c.expect(structurally_equal(r.observables[3].composite, tree("sin(cos(sin(w)))+cos(sin(w))+sin(w)")), "fused expression");
        }
        const std::size_t protect[] = {3, 7};
        const auto p = reduce(fd, protect);
        c.expect(p.size() == 5, "protected size " + std::to_string(p.size()));
        if (p.size() == 5) {
            c.expect(same(p.observables[3], ObservableExpr::unary(Prim::Sin, 2)), "sin(w3) kept");
            c.expect(p.observables[4].op == Prim::Composite && p.observables[4].args == std::vector<std::size_t>{3}, "composite over w4");
            c.expect(structurally_equal(p.observables[4].composite, tree("sin(cos(w))+cos(w)+w")), "fused expression");
        }
    });

    criterion(5, "contraction skip logic per pair", [](Check& c) {
        const auto g = build_graph(decompose_dedup(parse(kNested), 2));
        const auto s = must_visit(g);
        const struct {
            std::size_t i, j;
            bool contract;
        } pairs[] = {{0, 2, false}, {1, 2, false}, {2, 3, false}, {2, 7, true}};
        for (const auto& p : pairs) {
            const auto o = classify_pair(g, s, p.i, p.j);
            c.expect((o == PairOutcome::Contract) == p.contract,
                     "pair (" + std::to_string(p.i + 1) + "," + std::to_string(p.j + 1) + ") " + to_string(o));
        }
    });

    criterion(6, "hybrid automaton counts and evaluation", [](Check& c) {
        const auto full = dha_decomposition();
        const auto red = dha_reduced();
        c.expect(full.size() == 16, "dedup count " + std::to_string(full.size()));
        c.expect(red.size() == 13, "reduced count " + std::to_string(red.size()));
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> ux(-2, 2), uu(-1, 1);
        int checked = 0, bad = 0;
        while (checked < 1000) {
            const double x = ux(rng), u = uu(rng);
            if (std::abs(x) < 1e-9 || std::abs(x + u - 1.0) < 1e-9) continue;
            ++checked;
            const auto want = dha_simulate(x, u);
            const auto ref = oracle::dha_trace(x, u);
            const auto got = dha_evaluate(red, x, u);
            if (got.mode != want.mode || std::abs(got.next - want.next) > 1e-9 || ref.mode != want.mode) ++bad;
        }
        c.expect(bad == 0, std::to_string(bad) + " mismatches");
    });

    criterion(7, "LSTM ingestion size and evaluation", [](Check& c) {
        const auto spec = LstmSpec::random(5, 1, 7);
        const auto fd = lstm_ingest(spec);
        c.expect(fd.size() > 100, "size " + std::to_string(fd.size()));
        c.expect(dedup(fd).size() == fd.size(), "dedup changed the size");
        c.expect(reduce(dedup(fd)).size() == fd.size(), "reduce changed the size");
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1, 1);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            VectorXd x(1), h(5), c0(5);
            std::vector<double> in;
            for (auto* v : {&x, &h, &c0}) {
                for (Eigen::Index i = 0; i < v->size(); ++i) {
                    (*v)(i) = u(rng);
                    in.push_back((*v)(i));
                }
            }
            const auto want = lstm_step(spec, x, h, c0);
            const auto got = eval_fd(fd, in);
            for (int r = 0; r < 5; ++r) worst = std::max(worst, std::abs(got[static_cast<std::size_t>(r)] - want.h(r)));
        }
        c.expect(worst <= 1e-9, "max error " + std::to_string(worst));
    });

    criterion(8, "graph sets contain sampled graph points", [](Check& c) {
        ApproxConfig cfg;
        cfg.tol = 0.05;
        struct Case {
            std::string name;
            FunctionalDecomposition fd;
            std::vector<std::pair<double, double>> box;
        };
        std::vector<Case> cases;
        cases.push_back({"sin(x)+sin(x)^2", decompose_dedup(parse("sin(x)+sin(x)^2"), 1), {{-kPi, kPi}}});
        cases.push_back({"nested", decompose_dedup(parse(kNested), 2), {{-1, 1}, {-1, 1}}});
        cases.push_back({"x*y", decompose_dedup(parse("x*y"), 2), {{-1, 1}, {-1, 1}}});
        cases.push_back({"step(x)", decompose_dedup(parse("step(x)"), 1), {{-1, 1}}});
        cases.push_back({"lstm", lstm_ingest(LstmSpec::random(2, 1, 9)), std::vector<std::pair<double, double>>(5, {-1.0, 1.0})});
        for (const auto& k : cases) {
            std::vector<Interval> dom;
            for (const auto& [lo, hi] : k.box) dom.emplace_back(lo, hi);
            const auto gs = build_graph_set(k.fd, dom, cfg);
            std::size_t ok = 0;
            const auto pts = graph_points(k.fd, k.box, 1000, 80);
            for (const auto& p : pts) ok += contains(gs.set, p, 1e-6);
            c.expect(ok == pts.size(), k.name + " " + std::to_string(ok) + "/1000");
        }
    });

    criterion(9, "redundant decomposition costs segments and accuracy", [](Check& c) {
        const auto rpn = parse("sin(x)+sin(x)^2");
        ApproxConfig cfg;
        cfg.tol_by_prim = {{"sin", 0.1}, {"sq", 0.01}};
        const Interval dom[] = {Interval(-kPi, kPi)};
        const auto g6 = build_graph_set(decompose_basic(rpn, 1), dom, cfg);
        const auto g7 = build_graph_set(decompose_dedup(rpn, 1), dom, cfg);
        c.expect(g6.total_segments > g7.total_segments,
                 "segments " + std::to_string(g6.total_segments) + " vs " + std::to_string(g7.total_segments));
        int smaller = 0;
        for (int k = 0; k < 50; ++k) {
            const double x = -kPi + 2 * kPi * (k + 0.5) / 50;
            if (output_slice(g6.set, x).width() < output_slice(g7.set, x).width() - 1e-7) ++smaller;
        }
        c.expect(smaller == 0, std::to_string(smaller) + " x values where the redundant set is narrower");
    });

    criterion(10, "step set from a union of segments", [](Check& c) {
        const auto Z = from_poly_union(exact_step(Interval(-1, 1), 0.0));
        c.expect(count_leaves(Z) == 2, "leaves " + std::to_string(count_leaves(Z)));
        auto pt = [](double a, double b) { return (VectorXd(2) << a, b).finished(); };
        c.expect(contains(Z, pt(-0.5, 0)), "(-0.5,0) rejected");
        c.expect(contains(Z, pt(0.5, 1)), "(0.5,1) rejected");
        c.expect(!contains(Z, pt(-0.5, 1)), "(-0.5,1) accepted");
        c.expect(!contains(Z, pt(0.5, 0)), "(0.5,0) accepted");
        // The gap is 9e-13 wide, so the check runs without slack.
        SearchOptions tight;
        tight.feas_tol = 1e-15;
        const auto inner = from_poly_union(exact_step(Interval(-1, 1), -1e-12));
        c.expect(!contains(inner, pt(-1e-13, 0), 0.0, tight), "(-1e-13,0) accepted by the inner set");
        c.expect(contains(inner, pt(-2e-12, 0), 0.0, tight), "(-2e-12,0) rejected by the inner set");
    });

    criterion(11, "must-visit sets against walk enumeration on 200 DAGs", [](Check& c) {
        std::mt19937_64 rng(11);
        int bad = 0;
        for (int t = 0; t < 200; ++t) {
            const std::size_t n = 1 + static_cast<std::size_t>(t % 10);
            const auto succ = oracle::random_dag(n, 0.2 + 0.05 * (t % 7), rng);
            Digraph g(n);
            for (std::size_t v = 0; v < n; ++v) {
                for (auto u : succ[v]) g.add_edge(v, u);
            }
            const auto s = must_visit(g);
            const auto pred = oracle::transpose(succ);
            for (std::size_t v = 0; v < n; ++v) {
                const std::set<std::size_t> W(s.W[v].begin(), s.W[v].end()), M(s.M[v].begin(), s.M[v].end());
                if (W != oracle::walk_intersection(succ, v) || M != oracle::walk_intersection(pred, v)) ++bad;
            }
        }
        c.expect(bad == 0, std::to_string(bad) + " vertices disagree");
    });

    return failures == 0 ? 0 : 1;
}
