#include "funcdec/exprtree.hpp"

#include "funcdec/error.hpp"
#include "numfmt.hpp"

#include <algorithm>
#include <map>

namespace funcdec {

ExprPtr ExprNode::arg() {
    static const ExprPtr a = std::make_shared<const ExprNode>();
    return a;
}

ExprPtr ExprNode::unary(Prim op, ExprPtr child, std::vector<double> params) {
    if (arity(op) != 1 || op == Prim::Composite) throw InvariantError("expression node: not a unary primitive");
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Unary;
    n->op = op;
    n->params = std::move(params);
    n->children = {std::move(child)};
    return n;
}

ExprPtr ExprNode::binary(Prim op, ExprPtr lhs, ExprPtr rhs) {
    if (arity(op) != 2) throw InvariantError("expression node: not a binary primitive");
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Binary;
    n->op = op;
    n->children = {std::move(lhs), std::move(rhs)};
    return n;
}

ExprPtr ExprNode::affine(std::vector<ExprPtr> children, std::vector<double> coeffs, double offset) {
    if (children.size() != coeffs.size()) throw InvariantError("expression node: affine coefficient count mismatch");
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Affine;
    n->children = std::move(children);
    n->coeffs = std::move(coeffs);
    n->offset = offset;
    return n;
}

double eval(const ExprNode& node, double x) {
    switch (node.kind) {
    case ExprNode::Kind::Arg: return x;
    case ExprNode::Kind::Unary: return apply_unary(node.op, eval(*node.children[0], x), node.params);
    case ExprNode::Kind::Binary:
        return apply_binary(node.op, eval(*node.children[0], x), eval(*node.children[1], x));
    case ExprNode::Kind::Affine: {
        double s = node.offset;
        for (std::size_t i = 0; i < node.children.size(); ++i) s += node.coeffs[i] * eval(*node.children[i], x);
        return s;
    }
    }
    return x;
}

ExprPtr substitute(const ExprPtr& node, const ExprPtr& replacement) {
    switch (node->kind) {
    case ExprNode::Kind::Arg: return replacement;
    case ExprNode::Kind::Unary: return ExprNode::unary(node->op, substitute(node->children[0], replacement), node->params);
    case ExprNode::Kind::Binary:
        return ExprNode::binary(node->op, substitute(node->children[0], replacement), substitute(node->children[1], replacement));
    case ExprNode::Kind::Affine: {
        std::vector<ExprPtr> kids;
        kids.reserve(node->children.size());
        for (const auto& c : node->children) kids.push_back(substitute(c, replacement));
        return ExprNode::affine(std::move(kids), node->coeffs, node->offset);
    }
    }
    return node;
}

namespace {

std::string key_of(const ExprNode& n);

std::string key_params(const std::vector<double>& p) {
    std::string s;
    for (double v : p) s += "," + detail::exact(v);
    return s;
}

std::string key_of(const ExprNode& n) {
    switch (n.kind) {
    case ExprNode::Kind::Arg: return "$";
    case ExprNode::Kind::Unary: return std::string(name(n.op)) + "[" + key_params(n.params) + "](" + key_of(*n.children[0]) + ")";
    case ExprNode::Kind::Binary:
        return std::string(name(n.op)) + "(" + key_of(*n.children[0]) + ";" + key_of(*n.children[1]) + ")";
    case ExprNode::Kind::Affine: {
        std::string s = "aff(" + detail::exact(n.offset);
        for (std::size_t i = 0; i < n.children.size(); ++i) s += ";" + detail::exact(n.coeffs[i]) + "*" + key_of(*n.children[i]);
        return s + ")";
    }
    }
    return "?";
}

void collect_affine(const ExprPtr& n, double scale, std::map<std::string, std::pair<ExprPtr, double>>& terms, double& offset) {
    if (n->kind == ExprNode::Kind::Affine) {
        offset += scale * n->offset;
        for (std::size_t i = 0; i < n->children.size(); ++i) collect_affine(n->children[i], scale * n->coeffs[i], terms, offset);
        return;
    }
    auto k = key_of(*n);
    auto [it, inserted] = terms.try_emplace(std::move(k), n, 0.0);
    it->second.second += scale;
}

} // namespace

ExprPtr canonicalize(const ExprPtr& node) {
    switch (node->kind) {
    case ExprNode::Kind::Arg: return node;
    case ExprNode::Kind::Unary: return ExprNode::unary(node->op, canonicalize(node->children[0]), node->params);
    case ExprNode::Kind::Binary: {
        auto l = canonicalize(node->children[0]);
        auto r = canonicalize(node->children[1]);
        if (is_commutative(node->op) && key_of(*r) < key_of(*l)) std::swap(l, r);
        return ExprNode::binary(node->op, std::move(l), std::move(r));
    }
    case ExprNode::Kind::Affine: {
        std::vector<ExprPtr> kids;
        for (const auto& c : node->children) kids.push_back(canonicalize(c));
        std::map<std::string, std::pair<ExprPtr, double>> terms;
        double offset = 0.0;
        collect_affine(ExprNode::affine(std::move(kids), node->coeffs, node->offset), 1.0, terms, offset);
        std::vector<ExprPtr> out_kids;
        std::vector<double> out_coeffs;
        for (auto& [k, tc] : terms) {
            if (tc.second == 0.0) continue;
            out_kids.push_back(tc.first);
            out_coeffs.push_back(tc.second);
        }
        if (out_kids.size() == 1 && out_coeffs[0] == 1.0 && offset == 0.0) return out_kids[0];
        return ExprNode::affine(std::move(out_kids), std::move(out_coeffs), offset);
    }
    }
    return node;
}

std::string canonical_key(const ExprPtr& node) { return key_of(*canonicalize(node)); }

std::string to_string(const ExprNode& node, std::string_view arg_name) {
    switch (node.kind) {
    case ExprNode::Kind::Arg: return std::string(arg_name);
    case ExprNode::Kind::Unary: {
        const std::string inner = to_string(*node.children[0], arg_name);
        switch (node.op) {
        case Prim::PowK: return "(" + inner + ")^" + detail::pretty(node.params.at(0));
        case Prim::Recip: return detail::pretty(node.params.at(0)) + "/(" + inner + ")";
        case Prim::PowBase: return detail::pretty(node.params.at(0)) + "^(" + inner + ")";
        default: return std::string(name(node.op)) + "(" + inner + ")";
        }
    }
    case ExprNode::Kind::Binary: {
        const char* sym = node.op == Prim::Mul ? "*" : node.op == Prim::Div ? "/" : "^";
        return "(" + to_string(*node.children[0], arg_name) + ")" + sym + "(" + to_string(*node.children[1], arg_name) + ")";
    }
    case ExprNode::Kind::Affine: {
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            parts.push_back(detail::term(node.coeffs[i], to_string(*node.children[i], arg_name)));
        }
        return detail::join_terms(parts, node.offset);
    }
    }
    return {};
}

bool has_discontinuity(const ExprNode& node) {
    if (node.kind == ExprNode::Kind::Unary && node.op == Prim::Step) return true;
    return std::any_of(node.children.begin(), node.children.end(), [](const ExprPtr& c) { return has_discontinuity(*c); });
}

} // namespace funcdec
