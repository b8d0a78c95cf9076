#include "funcdec/decomp.hpp"

#include "funcdec/error.hpp"
#include "numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace funcdec {

namespace {

std::string wname(std::size_t i) { return "w_" + std::to_string(i + 1); }

std::vector<AffineTerm> normalize_terms(std::vector<AffineTerm> terms) {
    std::map<std::size_t, double> acc;
    for (const auto& t : terms) acc[t.index] += t.coeff;
    std::vector<AffineTerm> out;
    for (const auto& [i, c] : acc) {
        if (c != 0.0) out.push_back({i, c});
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// ObservableExpr

ObservableExpr ObservableExpr::input(std::size_t slot) {
    ObservableExpr e;
    e.kind = ObsKind::Input;
    e.slot = slot;
    return e;
}

ObservableExpr ObservableExpr::unary(Prim op, std::size_t arg, std::vector<double> params) {
    if (arity(op) != 1 || op == Prim::Composite) throw InvariantError("unary observable needs a plain unary primitive");
    ObservableExpr e;
    e.kind = ObsKind::Unary;
    e.op = op;
    e.args = {arg};
    e.params = std::move(params);
    return e;
}

ObservableExpr ObservableExpr::composite_of(ExprPtr tree, std::size_t arg) {
    if (!tree) throw InvariantError("composite observable without expression");
    ObservableExpr e;
    e.kind = ObsKind::Unary;
    e.op = Prim::Composite;
    e.args = {arg};
    e.composite = std::move(tree);
    return e;
}

ObservableExpr ObservableExpr::binary(Prim op, std::size_t lhs, std::size_t rhs) {
    if (arity(op) != 2) throw InvariantError("binary observable needs a binary primitive");
    ObservableExpr e;
    e.kind = ObsKind::Binary;
    e.op = op;
    if (is_commutative(op) && rhs < lhs) std::swap(lhs, rhs);
    e.args = {lhs, rhs};
    return e;
}

ObservableExpr ObservableExpr::affine(std::vector<AffineTerm> terms, double offset) {
    ObservableExpr e;
    e.kind = ObsKind::Affine;
    e.terms = normalize_terms(std::move(terms));
    e.offset = offset;
    return e;
}

std::vector<std::size_t> ObservableExpr::operands() const {
    if (kind == ObsKind::Affine) {
        std::vector<std::size_t> out;
        out.reserve(terms.size());
        for (const auto& t : terms) out.push_back(t.index);
        return out;
    }
    return args;
}

std::string ObservableExpr::canonical_key() const {
    switch (kind) {
    case ObsKind::Input: return "in:" + std::to_string(slot);
    case ObsKind::Unary: {
        if (op == Prim::Composite) return "c:" + funcdec::canonical_key(composite) + ":" + std::to_string(args[0]);
        std::string s = "u:" + std::string(name(op));
        for (double p : params) s += "," + detail::exact(p);
        return s + ":" + std::to_string(args[0]);
    }
    case ObsKind::Binary:
        return "b:" + std::string(name(op)) + ":" + std::to_string(args[0]) + "," + std::to_string(args[1]);
    case ObsKind::Affine: {
        std::string s = "a:" + detail::exact(offset);
        for (const auto& t : terms) s += ";" + std::to_string(t.index) + "*" + detail::exact(t.coeff);
        return s;
    }
    }
    return {};
}

std::string ObservableExpr::to_string() const {
    switch (kind) {
    case ObsKind::Input: return "x_" + std::to_string(slot + 1);
    case ObsKind::Unary: {
        const std::string a = wname(args[0]);
        switch (op) {
        case Prim::Composite: return funcdec::to_string(*composite, a);
        case Prim::PowK: return a + "^" + detail::pretty(params.at(0));
        case Prim::Recip: return detail::pretty(params.at(0)) + "/" + a;
        case Prim::PowBase: return detail::pretty(params.at(0)) + "^" + a;
        default: return std::string(name(op)) + "(" + a + ")";
        }
    }
    case ObsKind::Binary: {
        const char* sym = op == Prim::Mul ? "*" : op == Prim::Div ? "/" : "^";
        return wname(args[0]) + sym + wname(args[1]);
    }
    case ObsKind::Affine: {
        std::vector<std::string> parts;
        for (const auto& t : terms) parts.push_back(detail::term(t.coeff, wname(t.index)));
        return detail::join_terms(parts, offset);
    }
    }
    return {};
}

ExprPtr ObservableExpr::as_tree() const {
    if (kind != ObsKind::Unary) throw InvariantError("only unary observables have a single-argument tree");
    if (op == Prim::Composite) return composite;
    return ExprNode::unary(op, ExprNode::arg(), params);
}

// ---------------------------------------------------------------------------
// FunctionalDecomposition

void FunctionalDecomposition::validate() const {
    if (observables.size() < n_x) throw InvariantError("fewer observables than inputs");
    if (!variable_names.empty() && variable_names.size() != n_x) throw InvariantError("variable name count differs from n_x");
    for (std::size_t j = 0; j < observables.size(); ++j) {
        const auto& o = observables[j];
        const std::string where = " at " + wname(j);
        if (j < n_x) {
            if (o.kind != ObsKind::Input || o.slot != j) throw InvariantError("inputs must lead in slot order" + where);
            continue;
        }
        switch (o.kind) {
        case ObsKind::Input: throw InvariantError("input observable after the input block" + where);
        case ObsKind::Unary:
            if (o.args.size() != 1 || arity(o.op) != 1) throw InvariantError("malformed unary observable" + where);
            if ((o.op == Prim::Composite) != static_cast<bool>(o.composite)) throw InvariantError("composite payload mismatch" + where);
            if ((o.op == Prim::PowK || o.op == Prim::Recip || o.op == Prim::PowBase) && o.params.size() != 1) {
                throw InvariantError("missing primitive parameter" + where);
            }
            break;
        case ObsKind::Binary:
            if (o.args.size() != 2 || arity(o.op) != 2) throw InvariantError("malformed binary observable" + where);
            break;
        case ObsKind::Affine:
            if (!std::isfinite(o.offset)) throw InvariantError("non-finite affine offset" + where);
            for (std::size_t t = 0; t < o.terms.size(); ++t) {
                if (o.terms[t].coeff == 0.0 || !std::isfinite(o.terms[t].coeff)) throw InvariantError("zero or non-finite affine coefficient" + where);
                if (t > 0 && o.terms[t - 1].index >= o.terms[t].index) throw InvariantError("affine terms not strictly sorted" + where);
            }
            break;
        }
        for (std::size_t a : o.operands()) {
            if (a >= j) throw InvariantError("observable references a later or equal index" + where);
        }
    }
    for (std::size_t o : outputs) {
        if (o >= observables.size()) throw InvariantError("output index out of range");
    }
}

std::string FunctionalDecomposition::to_string() const {
    std::string s;
    for (std::size_t j = 0; j < observables.size(); ++j) {
        s += wname(j);
        if (j < n_x) {
            s += " <- " + (variable_names.empty() ? observables[j].to_string() : variable_names[j]);
        } else {
            s += " = " + observables[j].to_string();
        }
        if (std::find(outputs.begin(), outputs.end(), j) != outputs.end()) s += "  <- output";
        s += '\n';
    }
    return s;
}

// ---------------------------------------------------------------------------
// DecompositionBuilder

DecompositionBuilder::DecompositionBuilder(std::size_t n_x, bool dedup, std::vector<std::string> names) : dedup_(dedup) {
    fd_.n_x = n_x;
    fd_.variable_names = std::move(names);
    for (std::size_t s = 0; s < n_x; ++s) fd_.observables.push_back(ObservableExpr::input(s));
}

Operand DecompositionBuilder::input(std::size_t slot) const {
    if (slot >= fd_.n_x) throw DimensionError("input slot out of range");
    return Operand::obs(slot);
}

std::size_t DecompositionBuilder::emit(ObservableExpr e) {
    if (dedup_ && e.kind != ObsKind::Input) {
        auto key = e.canonical_key();
        if (auto it = seen_.find(key); it != seen_.end()) return it->second;
        seen_.emplace(std::move(key), fd_.observables.size());
    }
    fd_.observables.push_back(std::move(e));
    return fd_.observables.size() - 1;
}

Operand DecompositionBuilder::unary(Prim op, Operand a, std::vector<double> params) {
    if (a.is_constant()) return Operand::constant(apply_unary(op, a.value, params));
    return Operand::obs(emit(ObservableExpr::unary(op, *a.index, std::move(params))));
}

Operand DecompositionBuilder::composite(const ExprPtr& tree, Operand a) {
    if (a.is_constant()) return Operand::constant(eval(*tree, a.value));
    return Operand::obs(emit(ObservableExpr::composite_of(canonicalize(tree), *a.index)));
}

Operand DecompositionBuilder::binary(Prim op, Operand a, Operand b) {
    switch (op) {
    case Prim::Mul: return mul(a, b);
    case Prim::Div: return div(a, b);
    case Prim::Pow: return pow(a, b);
    default: throw InvariantError("not a binary primitive");
    }
}

Operand DecompositionBuilder::affine(std::span<const std::pair<Operand, double>> terms, double offset) {
    std::vector<AffineTerm> raw;
    for (const auto& [op, c] : terms) {
        if (op.is_constant()) {
            offset += c * op.value;
        } else {
            raw.push_back({*op.index, c});
        }
    }
    auto e = ObservableExpr::affine(std::move(raw), offset);
    if (e.terms.empty()) return Operand::constant(e.offset);
    if (e.terms.size() == 1 && e.terms[0].coeff == 1.0 && e.offset == 0.0) return Operand::obs(e.terms[0].index);
    return Operand::obs(emit(std::move(e)));
}

Operand DecompositionBuilder::add(Operand a, Operand b) {
    const std::pair<Operand, double> t[] = {{a, 1.0}, {b, 1.0}};
    return affine(t, 0.0);
}

Operand DecompositionBuilder::sub(Operand a, Operand b) {
    const std::pair<Operand, double> t[] = {{a, 1.0}, {b, -1.0}};
    return affine(t, 0.0);
}

Operand DecompositionBuilder::neg(Operand a) { return scale(a, -1.0); }

Operand DecompositionBuilder::scale(Operand a, double c) {
    const std::pair<Operand, double> t[] = {{a, c}};
    return affine(t, 0.0);
}

Operand DecompositionBuilder::mul(Operand a, Operand b) {
    if (a.is_constant() && b.is_constant()) return Operand::constant(apply_binary(Prim::Mul, a.value, b.value));
    if (a.is_constant()) return scale(b, a.value);
    if (b.is_constant()) return scale(a, b.value);
    if (*a.index == *b.index) return unary(Prim::Sq, a);
    return Operand::obs(emit(ObservableExpr::binary(Prim::Mul, *a.index, *b.index)));
}

Operand DecompositionBuilder::div(Operand a, Operand b) {
    if (b.is_constant()) {
        if (b.value == 0.0) throw DomainError("division by zero");
        if (a.is_constant()) return Operand::constant(apply_binary(Prim::Div, a.value, b.value));
        return scale(a, 1.0 / b.value);
    }
    if (a.is_constant()) return unary(Prim::Recip, b, {a.value});
    return Operand::obs(emit(ObservableExpr::binary(Prim::Div, *a.index, *b.index)));
}

Operand DecompositionBuilder::pow(Operand a, Operand b) {
    if (b.is_constant()) {
        const double k = b.value;
        if (a.is_constant()) return Operand::constant(apply_binary(Prim::Pow, a.value, k));
        if (k == 0.0) return Operand::constant(1.0);
        if (k == 1.0) return a;
        if (k == 2.0) return unary(Prim::Sq, a);
        return unary(Prim::PowK, a, {k});
    }
    if (a.is_constant()) {
        if (!(a.value > 0.0)) throw DomainError("non-positive base with a variable exponent");
        return unary(Prim::PowBase, b, {a.value});
    }
    return Operand::obs(emit(ObservableExpr::binary(Prim::Pow, *a.index, *b.index)));
}

std::size_t DecompositionBuilder::materialize(Operand a) {
    if (!a.is_constant()) return *a.index;
    return emit(ObservableExpr::affine({}, a.value));
}

FunctionalDecomposition DecompositionBuilder::finish(std::span<const Operand> outputs) {
    fd_.outputs.clear();
    for (const auto& o : outputs) fd_.outputs.push_back(materialize(o));
    fd_.validate();
    return fd_;
}

// ---------------------------------------------------------------------------
// RPN compilation

namespace {

struct StackEntry {
    Operand value;
    bool wrapper = false; // vector-output marker value or a sum of such values
};

std::vector<std::size_t> slots_for(const RpnExpr& rpn, std::span<const std::string> variables) {
    std::vector<std::size_t> slot(rpn.tokens.size(), 0);
    for (std::size_t t = 0; t < rpn.tokens.size(); ++t) {
        const auto& tok = rpn.tokens[t];
        if (tok.kind != TokenKind::Variable) continue;
        const auto it = std::find(variables.begin(), variables.end(), tok.lexeme);
        if (it == variables.end()) throw DimensionError("variable '" + tok.lexeme + "' is not among the declared inputs");
        slot[t] = static_cast<std::size_t>(it - variables.begin());
    }
    return slot;
}

FunctionalDecomposition compile(const RpnExpr& rpn, std::span<const std::string> variables, bool dedup) {
    if (rpn.empty()) throw ParseError("empty RPN stream", 0);
    const auto slot = slots_for(rpn, variables);
    DecompositionBuilder b(variables.size(), dedup, {variables.begin(), variables.end()});
    std::vector<StackEntry> stack;
    std::vector<Operand> outputs;
    bool vector_mode = false;

    auto pop = [&](const Token& t) {
        if (stack.empty()) throw ParseError("malformed RPN: stack underflow at '" + t.text() + "'", t.position);
        auto e = stack.back();
        stack.pop_back();
        return e;
    };
    auto plain = [&](const StackEntry& e, const Token& t) {
        if (e.wrapper) throw ParseError("vector output used inside arithmetic at '" + t.text() + "'", t.position);
        return e.value;
    };

    for (std::size_t i = 0; i < rpn.tokens.size(); ++i) {
        const auto& t = rpn.tokens[i];
        switch (t.kind) {
        case TokenKind::Number: stack.push_back({Operand::constant(t.value)}); break;
        case TokenKind::Variable: stack.push_back({b.input(slot[i])}); break;
        case TokenKind::Function: {
            const auto prim = function_from_name(t.lexeme);
            if (!prim) throw ParseError("unknown function '" + t.lexeme + "'", t.position);
            stack.push_back({b.unary(*prim, plain(pop(t), t))});
            break;
        }
        case TokenKind::UnaryMinus: stack.push_back({b.neg(plain(pop(t), t))}); break;
        case TokenKind::OutputMarker: {
            auto e = pop(t);
            outputs.push_back(plain(e, t));
            vector_mode = true;
            stack.push_back({e.value, true});
            break;
        }
        case TokenKind::BinaryOp: {
            auto rhs = pop(t);
            auto lhs = pop(t);
            if (lhs.wrapper || rhs.wrapper) {
                if (!(lhs.wrapper && rhs.wrapper) || t.lexeme != "+") {
                    throw ParseError("vector outputs may only be combined by '+'", t.position);
                }
                stack.push_back({lhs.value, true});
                break;
            }
            Operand r;
            switch (t.lexeme.empty() ? '?' : t.lexeme[0]) {
            case '+': r = b.add(lhs.value, rhs.value); break;
            case '-': r = b.sub(lhs.value, rhs.value); break;
            case '*': r = b.mul(lhs.value, rhs.value); break;
            case '/': r = b.div(lhs.value, rhs.value); break;
            case '^': r = b.pow(lhs.value, rhs.value); break;
            default: throw ParseError("unknown operator '" + t.lexeme + "'", t.position);
            }
            stack.push_back({r});
            break;
        }
        case TokenKind::LeftParen:
        case TokenKind::RightParen: throw ParseError("parenthesis in RPN stream", t.position);
        }
    }
    if (!vector_mode) {
        if (stack.size() != 1) throw ParseError("malformed RPN: expected exactly one result", rpn.tokens.back().position);
        outputs.push_back(stack.back().value);
    }
    return b.finish(outputs);
}

std::vector<std::string> default_variables(const RpnExpr& rpn, std::size_t n_x) {
    auto vars = rpn.variables();
    // w_k / wk naming addresses slots directly.
    bool indexed = !vars.empty();
    std::vector<std::string> slots(n_x);
    for (const auto& v : vars) {
        std::string digits = v.rfind("w_", 0) == 0 ? v.substr(2) : v.rfind('w', 0) == 0 ? v.substr(1) : "";
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            indexed = false;
            break;
        }
        const auto k = std::stoul(digits);
        if (k < 1 || k > n_x) {
            indexed = false;
            break;
        }
        slots[k - 1] = v;
    }
    if (indexed) {
        for (std::size_t s = 0; s < n_x; ++s) {
            if (slots[s].empty()) slots[s] = "w_" + std::to_string(s + 1);
        }
        return slots;
    }
    if (vars.size() != n_x) {
        throw DimensionError("variable count mismatch: expression uses " + std::to_string(vars.size()) + " variables, expected " +
                             std::to_string(n_x));
    }
    return vars;
}

} // namespace

FunctionalDecomposition decompose_basic(const RpnExpr& rpn, std::size_t n_x) {
    const auto vars = default_variables(rpn, n_x);
    return compile(rpn, vars, false);
}

FunctionalDecomposition decompose_basic(const RpnExpr& rpn, std::span<const std::string> variables) {
    return compile(rpn, variables, false);
}

FunctionalDecomposition decompose_dedup(const RpnExpr& rpn, std::size_t n_x) {
    const auto vars = default_variables(rpn, n_x);
    return compile(rpn, vars, true);
}

FunctionalDecomposition decompose_dedup(const RpnExpr& rpn, std::span<const std::string> variables) {
    return compile(rpn, variables, true);
}

RpnExpr wrap_vector(std::span<const RpnExpr> elements) {
    RpnExpr out;
    for (std::size_t e = 0; e < elements.size(); ++e) {
        out.tokens.insert(out.tokens.end(), elements[e].tokens.begin(), elements[e].tokens.end());
        out.tokens.push_back({TokenKind::OutputMarker, "•", 0.0, 0});
        if (e > 0) out.tokens.push_back({TokenKind::BinaryOp, "+", 0.0, 0});
    }
    return out;
}

FunctionalDecomposition concat_vector(std::span<const RpnExpr> elements, std::span<const std::string> variables) {
    if (elements.empty()) throw DimensionError("vector function needs at least one element");
    const RpnExpr wrapped = wrap_vector(elements);
    if (!variables.empty()) return compile(wrapped, variables, true);
    const auto vars = wrapped.variables();
    return compile(wrapped, vars, true);
}

// ---------------------------------------------------------------------------
// Rewrites over existing decompositions

FunctionalDecomposition dedup(const FunctionalDecomposition& fd) {
    fd.validate();
    DecompositionBuilder b(fd.n_x, true, fd.variable_names);
    std::vector<Operand> map;
    map.reserve(fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) {
        const auto& o = fd.observables[j];
        switch (o.kind) {
        case ObsKind::Input: map.push_back(b.input(o.slot)); break;
        case ObsKind::Unary:
            map.push_back(o.op == Prim::Composite ? b.composite(o.composite, map[o.args[0]]) : b.unary(o.op, map[o.args[0]], o.params));
            break;
        case ObsKind::Binary: map.push_back(b.binary(o.op, map[o.args[0]], map[o.args[1]])); break;
        case ObsKind::Affine: {
            std::vector<std::pair<Operand, double>> terms;
            for (const auto& t : o.terms) terms.emplace_back(map[t.index], t.coeff);
            map.push_back(b.affine(terms, o.offset));
            break;
        }
        }
    }
    std::vector<Operand> outs;
    for (std::size_t o : fd.outputs) outs.push_back(map[o]);
    return b.finish(outs);
}

FunctionalDecomposition prune_unused(const FunctionalDecomposition& fd, std::span<const std::size_t> keep,
                                     std::vector<std::optional<std::size_t>>* index_map) {
    std::vector<char> needed(fd.size(), 0);
    for (std::size_t s = 0; s < fd.n_x; ++s) needed[s] = 1;
    for (std::size_t o : fd.outputs) needed.at(o) = 1;
    for (std::size_t k : keep) needed.at(k) = 1;
    for (std::size_t j = fd.size(); j-- > fd.n_x;) {
        if (!needed[j]) continue;
        for (std::size_t a : fd.observables[j].operands()) needed[a] = 1;
    }
    std::vector<std::optional<std::size_t>> map(fd.size());
    FunctionalDecomposition out;
    out.n_x = fd.n_x;
    out.variable_names = fd.variable_names;
    for (std::size_t j = 0; j < fd.size(); ++j) {
        if (!needed[j]) continue;
        ObservableExpr o = fd.observables[j];
        for (auto& a : o.args) a = *map[a];
        for (auto& t : o.terms) t.index = *map[t.index];
        if (o.kind == ObsKind::Binary && is_commutative(o.op) && o.args[1] < o.args[0]) std::swap(o.args[0], o.args[1]);
        map[j] = out.observables.size();
        out.observables.push_back(std::move(o));
    }
    for (std::size_t o : fd.outputs) out.outputs.push_back(*map[o]);
    if (index_map) *index_map = std::move(map);
    return out;
}

FunctionalDecomposition fold_affine(const FunctionalDecomposition& fd, std::span<const std::size_t> keep,
                                    std::vector<std::optional<std::size_t>>* index_map) {
    fd.validate();
    FunctionalDecomposition cur = fd;
    std::vector<std::optional<std::size_t>> total(fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) total[j] = j;
    std::vector<std::size_t> protect(keep.begin(), keep.end());
    for (;;) {
        std::set<std::size_t> guarded(cur.outputs.begin(), cur.outputs.end());
        guarded.insert(protect.begin(), protect.end());
        std::vector<std::vector<std::size_t>> consumers(cur.size());
        for (std::size_t j = cur.n_x; j < cur.size(); ++j) {
            for (std::size_t a : cur.observables[j].operands()) {
                if (consumers[a].empty() || consumers[a].back() != j) consumers[a].push_back(j);
            }
        }
        bool changed = false;
        for (std::size_t j = cur.n_x; j < cur.size(); ++j) {
            const auto& src = cur.observables[j];
            if (src.kind != ObsKind::Affine || guarded.count(j) || consumers[j].size() != 1) continue;
            const std::size_t k = consumers[j][0];
            auto& dst = cur.observables[k];
            if (dst.kind != ObsKind::Affine) continue;
            std::vector<AffineTerm> merged;
            double offset = dst.offset;
            for (const auto& t : dst.terms) {
                if (t.index != j) {
                    merged.push_back(t);
                    continue;
                }
                offset += t.coeff * src.offset;
                for (const auto& s : src.terms) merged.push_back({s.index, t.coeff * s.coeff});
            }
            dst = ObservableExpr::affine(std::move(merged), offset);
            changed = true;
            break;
        }
        if (!changed) break;
        std::vector<std::optional<std::size_t>> map;
        cur = prune_unused(cur, protect, &map);
        for (auto& p : protect) p = *map[p];
        for (auto& t : total) {
            if (t) t = map[*t];
        }
    }
    cur.validate();
    if (index_map) *index_map = std::move(total);
    return cur;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> eval_all(const FunctionalDecomposition& fd, std::span<const double> inputs) {
    if (inputs.size() != fd.n_x) throw DimensionError("expected " + std::to_string(fd.n_x) + " inputs");
    std::vector<double> w(fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) {
        const auto& o = fd.observables[j];
        try {
            switch (o.kind) {
            case ObsKind::Input: w[j] = inputs[o.slot]; break;
            case ObsKind::Unary:
                w[j] = o.op == Prim::Composite ? eval(*o.composite, w[o.args[0]]) : apply_unary(o.op, w[o.args[0]], o.params);
                break;
            case ObsKind::Binary: w[j] = apply_binary(o.op, w[o.args[0]], w[o.args[1]]); break;
            case ObsKind::Affine: {
                double s = o.offset;
                for (const auto& t : o.terms) s += t.coeff * w[t.index];
                w[j] = s;
                break;
            }
            }
        } catch (const DomainError& e) {
            if (e.observable()) throw;
            throw DomainError(e.what(), j);
        }
    }
    return w;
}

std::vector<double> eval_fd(const FunctionalDecomposition& fd, std::span<const double> inputs) {
    const auto w = eval_all(fd, inputs);
    std::vector<double> out;
    out.reserve(fd.outputs.size());
    for (std::size_t o : fd.outputs) out.push_back(w[o]);
    return out;
}

// ---------------------------------------------------------------------------
// Expression trees from RPN

namespace {

bool is_const_node(const ExprPtr& n) { return n->kind == ExprNode::Kind::Affine && n->children.empty(); }
ExprPtr const_node(double v) { return ExprNode::affine({}, {}, v); }

} // namespace

ExprPtr tree_from_rpn(const RpnExpr& rpn, std::string_view variable) {
    std::vector<ExprPtr> st;
    auto pop = [&](const Token& t) {
        if (st.empty()) throw ParseError("malformed RPN: stack underflow", t.position);
        auto n = st.back();
        st.pop_back();
        return n;
    };
    for (const auto& t : rpn.tokens) {
        switch (t.kind) {
        case TokenKind::Number: st.push_back(const_node(t.value)); break;
        case TokenKind::Variable:
            if (t.lexeme != variable) throw DimensionError("unexpected variable '" + t.lexeme + "'");
            st.push_back(ExprNode::arg());
            break;
        case TokenKind::Function: st.push_back(ExprNode::unary(*function_from_name(t.lexeme), pop(t))); break;
        case TokenKind::UnaryMinus: st.push_back(ExprNode::affine({pop(t)}, {-1.0}, 0.0)); break;
        case TokenKind::BinaryOp: {
            auto r = pop(t);
            auto l = pop(t);
            switch (t.lexeme[0]) {
            case '+': st.push_back(ExprNode::affine({l, r}, {1.0, 1.0}, 0.0)); break;
            case '-': st.push_back(ExprNode::affine({l, r}, {1.0, -1.0}, 0.0)); break;
            case '*':
                if (is_const_node(l)) st.push_back(ExprNode::affine({r}, {l->offset}, 0.0));
                else if (is_const_node(r)) st.push_back(ExprNode::affine({l}, {r->offset}, 0.0));
                else st.push_back(ExprNode::binary(Prim::Mul, l, r));
                break;
            case '/':
                if (is_const_node(r)) st.push_back(ExprNode::affine({l}, {1.0 / r->offset}, 0.0));
                else if (is_const_node(l)) st.push_back(ExprNode::unary(Prim::Recip, r, {l->offset}));
                else st.push_back(ExprNode::binary(Prim::Div, l, r));
                break;
            case '^':
                if (is_const_node(r) && r->offset == 2.0) st.push_back(ExprNode::unary(Prim::Sq, l));
                else if (is_const_node(r)) st.push_back(ExprNode::unary(Prim::PowK, l, {r->offset}));
                else if (is_const_node(l)) st.push_back(ExprNode::unary(Prim::PowBase, r, {l->offset}));
                else st.push_back(ExprNode::binary(Prim::Pow, l, r));
                break;
            default: throw ParseError("unknown operator", t.position);
            }
            break;
        }
        default: throw ParseError("unsupported token in single-variable expression", t.position);
        }
    }
    if (st.size() != 1) throw ParseError("malformed RPN: expected exactly one result", 0);
    return canonicalize(st.back());
}

} // namespace funcdec
