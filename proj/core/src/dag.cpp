#include "funcdec/dag.hpp"

#include "funcdec/error.hpp"
#include "json_detail.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace funcdec {

// ---------------------------------------------------------------------------
// Digraph

void Digraph::add_edge(std::size_t from, std::size_t to) {
    auto& s = succ.at(from);
    auto it = std::lower_bound(s.begin(), s.end(), to);
    if (it != s.end() && *it == to) return;
    s.insert(it, to);
    auto& p = pred.at(to);
    p.insert(std::lower_bound(p.begin(), p.end(), from), from);
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
    const auto& s = succ.at(from);
    return std::binary_search(s.begin(), s.end(), to);
}

std::size_t Digraph::edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : succ) n += s.size();
    return n;
}

std::vector<std::size_t> Digraph::topological_order() const {
    std::vector<std::size_t> indeg(size());
    for (std::size_t v = 0; v < size(); ++v) indeg[v] = pred[v].size();
    std::vector<std::size_t> order, ready;
    for (std::size_t v = size(); v-- > 0;) {
        if (indeg[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        const auto v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (auto it = succ[v].rbegin(); it != succ[v].rend(); ++it) {
            if (--indeg[*it] == 0) ready.push_back(*it);
        }
    }
    if (order.size() != size()) throw InvariantError("graph has a cycle");
    return order;
}

// ---------------------------------------------------------------------------
// DecompGraph

std::vector<std::vector<int>> DecompGraph::adjacency() const {
    std::vector<std::vector<int>> a(n_vertices(), std::vector<int>(n_vertices(), 0));
    for (std::size_t i = 0; i < n_vertices(); ++i) {
        for (auto j : g.succ[i]) a[i][j] = 1;
    }
    return a;
}

std::vector<std::size_t> DecompGraph::protected_vertices() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < is_protected.size(); ++v) {
        if (is_protected[v]) out.push_back(v);
    }
    return out;
}

DecompGraph build_graph(const FunctionalDecomposition& fd, std::span<const std::size_t> extra_protected) {
    fd.validate();
    DecompGraph dg{fd, Digraph(fd.size()), std::vector<char>(fd.size(), 0)};
    for (std::size_t j = 0; j < fd.size(); ++j) {
        for (auto a : fd.observables[j].operands()) dg.g.add_edge(a, j);
    }
    for (auto o : fd.outputs) dg.is_protected[o] = 1;
    for (auto p : extra_protected) dg.is_protected.at(p) = 1;
    return dg;
}

// ---------------------------------------------------------------------------
// Must-visit sets

namespace {

using Bits = std::vector<char>;

// out[v] = intersection over n in next[v] of ({n} ∪ out[n]); empty when next[v]
// is empty. `order` lists every vertex after all of its `next` vertices.
std::vector<std::vector<std::size_t>> meet_over(const std::vector<std::vector<std::size_t>>& next,
                                                const std::vector<std::size_t>& order) {
    const std::size_t n = next.size();
    std::vector<Bits> sets(n, Bits(n, 0));
    for (auto v : order) {
        const auto& nx = next[v];
        if (nx.empty()) continue;
        Bits acc(n, 1);
        for (auto u : nx) {
            for (std::size_t k = 0; k < n; ++k) acc[k] = acc[k] && (k == u || sets[u][k]);
        }
        sets[v] = std::move(acc);
    }
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t k = 0; k < n; ++k) {
            if (sets[v][k]) out[v].push_back(k);
        }
    }
    return out;
}

} // namespace

bool MustVisitSets::in_W(std::size_t v, std::size_t u) const { return std::binary_search(W.at(v).begin(), W.at(v).end(), u); }
bool MustVisitSets::in_M(std::size_t v, std::size_t u) const { return std::binary_search(M.at(v).begin(), M.at(v).end(), u); }

MustVisitSets must_visit(const Digraph& g) {
    auto topo = g.topological_order();
    MustVisitSets s;
    s.M = meet_over(g.pred, topo);
    std::reverse(topo.begin(), topo.end());
    s.W = meet_over(g.succ, topo);
    return s;
}

// ---------------------------------------------------------------------------
// Composition and contraction

ExprPtr comp(const DecompGraph& graph, std::size_t i, std::size_t j) {
    std::vector<ExprPtr> memo(graph.n_vertices());
    std::function<ExprPtr(std::size_t)> rec = [&](std::size_t v) -> ExprPtr {
        if (v == i) return ExprNode::arg();
        if (memo[v]) return memo[v];
        const auto& o = graph.fd.observables[v];
        ExprPtr r;
        switch (o.kind) {
        case ObsKind::Input:
            throw InvariantError("comp: a reverse walk from w_" + std::to_string(j + 1) + " bypasses w_" + std::to_string(i + 1));
        case ObsKind::Unary: r = substitute(o.as_tree(), rec(o.args[0])); break;
        case ObsKind::Binary: r = ExprNode::binary(o.op, rec(o.args[0]), rec(o.args[1])); break;
        case ObsKind::Affine: {
            std::vector<ExprPtr> kids;
            std::vector<double> coeffs;
            for (const auto& t : o.terms) {
                kids.push_back(rec(t.index));
                coeffs.push_back(t.coeff);
            }
            r = ExprNode::affine(std::move(kids), std::move(coeffs), o.offset);
            break;
        }
        }
        memo[v] = r;
        return r;
    };
    return rec(j);
}

std::vector<std::size_t> interior(const DecompGraph& graph, std::size_t i, std::size_t j) {
    const std::size_t n = graph.n_vertices();
    Bits from_i(n, 0), to_j(n, 0);
    from_i[i] = 1;
    for (std::size_t v = i; v < n; ++v) {
        if (!from_i[v]) continue;
        for (auto s : graph.g.succ[v]) from_i[s] = 1;
    }
    to_j[j] = 1;
    for (std::size_t v = j + 1; v-- > 0;) {
        if (!to_j[v]) continue;
        for (auto p : graph.g.pred[v]) to_j[p] = 1;
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < n; ++v) {
        if (v != i && v != j && from_i[v] && to_j[v]) out.push_back(v);
    }
    return out;
}

const char* to_string(PairOutcome o) noexcept {
    switch (o) {
    case PairOutcome::NotInW: return "not-in-W";
    case PairOutcome::NotInM: return "not-in-M";
    case PairOutcome::DirectSingleSuccessor: return "direct-single-successor";
    case PairOutcome::InputRoot: return "input-root";
    case PairOutcome::ProtectedInterior: return "protected-interior";
    case PairOutcome::NoApproximationGain: return "no-approximation-gain";
    case PairOutcome::Contract: return "contract";
    }
    return "?";
}

namespace {

bool nonlinear(const ObservableExpr& o) { return o.kind == ObsKind::Unary || o.kind == ObsKind::Binary; }

// Single-operand observable equivalent to `tree` applied to w_i.
ObservableExpr observable_from_tree(const ExprPtr& tree, std::size_t i) {
    const auto t = canonicalize(tree);
    if (t->kind == ExprNode::Kind::Unary && t->children[0]->kind == ExprNode::Kind::Arg) {
        return ObservableExpr::unary(t->op, i, t->params);
    }
    if (t->kind == ExprNode::Kind::Affine &&
        std::all_of(t->children.begin(), t->children.end(), [](const ExprPtr& c) { return c->kind == ExprNode::Kind::Arg; })) {
        std::vector<AffineTerm> terms;
        for (double c : t->coeffs) terms.push_back({i, c});
        return ObservableExpr::affine(std::move(terms), t->offset);
    }
    return ObservableExpr::composite_of(t, i);
}

} // namespace

PairOutcome classify_pair(const DecompGraph& graph, const MustVisitSets& sets, std::size_t i, std::size_t j,
                          const ReduceOptions& opt) {
    if (!sets.in_W(i, j)) return PairOutcome::NotInW;
    if (!sets.in_M(j, i)) return PairOutcome::NotInM;
    if (graph.g.has_edge(i, j) && graph.out_degree(i) == 1) return PairOutcome::DirectSingleSuccessor;
    if (i < graph.fd.n_x && !opt.contract_from_inputs) return PairOutcome::InputRoot;
    const auto mid = interior(graph, i, j);
    if (std::any_of(mid.begin(), mid.end(), [&](std::size_t k) { return graph.is_protected[k] != 0; })) {
        return PairOutcome::ProtectedInterior;
    }
    if (opt.require_gain) {
        long gain = 0;
        for (auto k : mid) gain += nonlinear(graph.fd.observables[k]) ? 1 : 0;
        if (!nonlinear(graph.fd.observables[j])) gain -= 1;
        if (gain <= 0) return PairOutcome::NoApproximationGain;
    }
    return PairOutcome::Contract;
}

FunctionalDecomposition reduce(const FunctionalDecomposition& fd, std::span<const std::size_t> protect, const ReduceOptions& opt,
                               std::vector<Contraction>* trace) {
    fd.validate();
    FunctionalDecomposition cur = fd;
    std::vector<std::size_t> keep(protect.begin(), protect.end());
    for (auto k : keep) {
        if (k >= cur.size()) throw DimensionError("protected index out of range");
    }
    for (;;) {
        const auto graph = build_graph(cur, keep);
        const auto sets = must_visit(graph);
        bool fired = false;
        for (std::size_t i = 0; i < graph.n_vertices() && !fired; ++i) {
            for (auto j : sets.W[i]) {
                if (classify_pair(graph, sets, i, j, opt) != PairOutcome::Contract) continue;
                auto mid = interior(graph, i, j);
                cur.observables[j] = observable_from_tree(comp(graph, i, j), i);
                if (trace) trace->push_back({i, j, mid});
                // Every interior vertex feeds only the interior or j, so all of
                // them are now unused.
                std::vector<std::optional<std::size_t>> map;
                cur = prune_unused(cur, keep, &map);
                for (auto& k : keep) k = *map[k];
                fired = true;
                break;
            }
        }
        if (!fired) break;
    }
    cur.validate();
    return cur;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

} // namespace

std::string to_dot(const DecompGraph& graph) {
    const auto& fd = graph.fd;
    std::string s = "digraph decomposition {\n  rankdir=LR;\n  node [shape=box, fontname=\"Helvetica\"];\n";
    for (std::size_t v = 0; v < graph.n_vertices(); ++v) {
        std::string label = "w_" + std::to_string(v + 1);
        if (v < fd.n_x) {
            label += " <- " + (fd.variable_names.empty() ? fd.observables[v].to_string() : fd.variable_names[v]);
        } else {
            label += " = " + fd.observables[v].to_string();
        }
        s += "  v" + std::to_string(v + 1) + " [label=\"" + dot_escape(label) + "\"";
        if (v < fd.n_x) s += ", shape=ellipse";
        if (graph.is_protected[v]) s += ", style=\"filled,bold\", fillcolor=\"#f6d37a\", peripheries=2";
        s += "];\n";
    }
    for (std::size_t v = 0; v < graph.n_vertices(); ++v) {
        for (auto u : graph.g.succ[v]) s += "  v" + std::to_string(v + 1) + " -> v" + std::to_string(u + 1) + ";\n";
    }
    return s + "}\n";
}

std::string graph_to_json(const DecompGraph& graph, int indent) {
    auto j = detail::fd_to_json(graph.fd);
    j["adjacency"] = graph.adjacency();
    nlohmann::json prot = nlohmann::json::array();
    for (auto p : graph.protected_vertices()) prot.push_back(p + 1);
    j["protected"] = prot;
    return j.dump(indent);
}

} // namespace funcdec
