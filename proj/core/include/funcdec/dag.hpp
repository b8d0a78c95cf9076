#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "funcdec/decomp.hpp"

namespace funcdec {

// Plain directed graph over vertices 0..n-1; adjacency lists are sorted.
struct Digraph {
    std::vector<std::vector<std::size_t>> succ;
    std::vector<std::vector<std::size_t>> pred;

    explicit Digraph(std::size_t n = 0) : succ(n), pred(n) {}
    std::size_t size() const noexcept { return succ.size(); }
    void add_edge(std::size_t from, std::size_t to);
    bool has_edge(std::size_t from, std::size_t to) const;
    std::size_t edge_count() const noexcept;
    // Kahn order; throws InvariantError on a cycle.
    std::vector<std::size_t> topological_order() const;
};

// Graph view of a decomposition: edge i -> j iff w_i is an argument of h_j.
struct DecompGraph {
    FunctionalDecomposition fd;
    Digraph g;
    std::vector<char> is_protected;

    std::size_t n_vertices() const noexcept { return g.size(); }
    std::size_t n_edges() const noexcept { return g.edge_count(); }
    std::size_t out_degree(std::size_t v) const { return g.succ.at(v).size(); }
    std::size_t in_degree(std::size_t v) const { return g.pred.at(v).size(); }
    // A[i][j] = 1 iff w_i is an argument of h_j.
    std::vector<std::vector<int>> adjacency() const;
    std::vector<std::size_t> protected_vertices() const;
};

// Outputs are always protected; `extra` adds more.
DecompGraph build_graph(const FunctionalDecomposition& fd, std::span<const std::size_t> extra_protected = {});

// W[v]: vertices on every maximal forward walk from v (v excluded).
// M[v]: vertices on every maximal reverse walk from v (v excluded).
// Both lists are sorted.
struct MustVisitSets {
    std::vector<std::vector<std::size_t>> W;
    std::vector<std::vector<std::size_t>> M;

    bool in_W(std::size_t v, std::size_t u) const;
    bool in_M(std::size_t v, std::size_t u) const;
};

MustVisitSets must_visit(const Digraph& g);
inline MustVisitSets must_visit(const DecompGraph& g) { return must_visit(g.g); }

// Fused expression for w_j as a function of w_i alone (Arg = w_i). Throws
// InvariantError when some reverse walk from j reaches a source other than i.
ExprPtr comp(const DecompGraph& graph, std::size_t i, std::size_t j);

// Vertices lying on some path i -> ... -> j, endpoints excluded.
std::vector<std::size_t> interior(const DecompGraph& graph, std::size_t i, std::size_t j);

enum class PairOutcome {
    NotInW,                 // j is avoided by some forward walk from i
    NotInM,                 // i is avoided by some reverse walk from j
    DirectSingleSuccessor,  // j is i's only successor: nothing to fuse
    InputRoot,              // i is an input and input roots are disabled
    ProtectedInterior,      // a protected vertex would be absorbed
    NoApproximationGain,    // fusion would not reduce nonlinear observables
    Contract,
};

const char* to_string(PairOutcome o) noexcept;

struct ReduceOptions {
    // Allow an input vertex to root a contraction (may fuse an entire
    // single-input function into one composite).
    bool contract_from_inputs = false;
    // Only fuse when the number of nonlinear observables strictly drops.
    bool require_gain = true;
};

PairOutcome classify_pair(const DecompGraph& graph, const MustVisitSets& sets, std::size_t i, std::size_t j,
                          const ReduceOptions& opt = {});

struct Contraction {
    std::size_t i;      // indices in the decomposition the contraction was applied to
    std::size_t j;
    std::vector<std::size_t> removed;
};

// Repeated contraction until no pair fires. Protected observables (and
// outputs) survive; indices are re-numbered contiguously.
FunctionalDecomposition reduce(const FunctionalDecomposition& fd, std::span<const std::size_t> protect = {},
                               const ReduceOptions& opt = {}, std::vector<Contraction>* trace = nullptr);

std::string to_dot(const DecompGraph& graph);
// Decomposition JSON plus "adjacency" and "protected" (1-based).
std::string graph_to_json(const DecompGraph& graph, int indent = 2);

} // namespace funcdec
