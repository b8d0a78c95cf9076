#include "json_detail.hpp"

#include "funcdec/error.hpp"

namespace funcdec {

namespace detail {

using nlohmann::json;

namespace {

std::string_view kind_name(ObsKind k) {
    switch (k) {
    case ObsKind::Input: return "input";
    case ObsKind::Unary: return "unary";
    case ObsKind::Binary: return "binary";
    case ObsKind::Affine: return "affine";
    }
    return "?";
}

ObsKind kind_from(const std::string& s) {
    if (s == "input") return ObsKind::Input;
    if (s == "unary") return ObsKind::Unary;
    if (s == "binary") return ObsKind::Binary;
    if (s == "affine") return ObsKind::Affine;
    throw InvariantError("unknown observable kind '" + s + "'");
}

Prim prim_from(const json& j) {
    const auto p = prim_from_name(j.get<std::string>());
    if (!p) throw InvariantError("unknown primitive '" + j.get<std::string>() + "'");
    return *p;
}

std::size_t one_based(const json& j, std::size_t limit) {
    const auto v = j.get<long long>();
    if (v < 1 || static_cast<std::size_t>(v) > limit) throw InvariantError("observable index out of range: " + std::to_string(v));
    return static_cast<std::size_t>(v - 1);
}

} // namespace

json tree_to_json(const ExprNode& n) {
    switch (n.kind) {
    case ExprNode::Kind::Arg: return {{"kind", "arg"}};
    case ExprNode::Kind::Unary:
        return {{"kind", "unary"}, {"op", name(n.op)}, {"params", n.params}, {"args", json::array({tree_to_json(*n.children[0])})}};
    case ExprNode::Kind::Binary:
        return {{"kind", "binary"},
                {"op", name(n.op)},
                {"args", json::array({tree_to_json(*n.children[0]), tree_to_json(*n.children[1])})}};
    case ExprNode::Kind::Affine: {
        json args = json::array();
        for (const auto& c : n.children) args.push_back(tree_to_json(*c));
        return {{"kind", "affine"}, {"coeffs", n.coeffs}, {"offset", n.offset}, {"args", args}};
    }
    }
    return {};
}

ExprPtr tree_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "arg") return ExprNode::arg();
    std::vector<ExprPtr> kids;
    for (const auto& a : j.at("args")) kids.push_back(tree_from_json(a));
    if (kind == "unary") {
        if (kids.size() != 1) throw InvariantError("unary expression node needs one argument");
        return ExprNode::unary(prim_from(j.at("op")), kids[0], j.value("params", std::vector<double>{}));
    }
    if (kind == "binary") {
        if (kids.size() != 2) throw InvariantError("binary expression node needs two arguments");
        return ExprNode::binary(prim_from(j.at("op")), kids[0], kids[1]);
    }
    if (kind == "affine") return ExprNode::affine(std::move(kids), j.at("coeffs").get<std::vector<double>>(), j.value("offset", 0.0));
    throw InvariantError("unknown expression node kind '" + kind + "'");
}

json fd_to_json(const FunctionalDecomposition& fd) {
    json obs = json::array();
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const auto& o = fd.observables[i];
        json e = {{"index", i + 1}, {"kind", kind_name(o.kind)}};
        switch (o.kind) {
        case ObsKind::Input:
            e["slot"] = o.slot + 1;
            if (!fd.variable_names.empty()) e["name"] = fd.variable_names[o.slot];
            break;
        case ObsKind::Unary:
        case ObsKind::Binary: {
            e["op"] = name(o.op);
            json args = json::array();
            for (auto a : o.args) args.push_back(a + 1);
            e["args"] = args;
            if (!o.params.empty()) e["params"] = o.params;
            if (o.composite) e["expr"] = tree_to_json(*o.composite);
            break;
        }
        case ObsKind::Affine: {
            json args = json::array();
            json coeffs = json::array();
            for (const auto& t : o.terms) {
                args.push_back(t.index + 1);
                coeffs.push_back(t.coeff);
            }
            e["args"] = args;
            e["coeffs"] = coeffs;
            e["offset"] = o.offset;
            break;
        }
        }
        if (o.kind != ObsKind::Input) e["text"] = o.to_string();
        obs.push_back(std::move(e));
    }
    json outs = json::array();
    for (auto o : fd.outputs) outs.push_back(o + 1);
    json j = {{"n_x", fd.n_x}, {"observables", obs}, {"outputs", outs}};
    if (!fd.variable_names.empty()) j["variables"] = fd.variable_names;
    return j;
}

FunctionalDecomposition fd_from_json(const json& j) {
    try {
        FunctionalDecomposition fd;
        fd.n_x = j.at("n_x").get<std::size_t>();
        if (j.contains("variables")) fd.variable_names = j.at("variables").get<std::vector<std::string>>();
        const auto& obs = j.at("observables");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const auto& e = obs[i];
            if (e.contains("index") && e.at("index").get<std::size_t>() != i + 1) {
                throw InvariantError("observable indices must be contiguous from 1");
            }
            switch (kind_from(e.at("kind").get<std::string>())) {
            case ObsKind::Input: fd.observables.push_back(ObservableExpr::input(one_based(e.at("slot"), fd.n_x))); break;
            case ObsKind::Unary: {
                const Prim p = prim_from(e.at("op"));
                const auto a = one_based(e.at("args").at(0), i);
                if (e.at("args").size() != 1) throw InvariantError("unary observable needs one argument");
                if (p == Prim::Composite) {
                    fd.observables.push_back(ObservableExpr::composite_of(tree_from_json(e.at("expr")), a));
                } else {
                    fd.observables.push_back(ObservableExpr::unary(p, a, e.value("params", std::vector<double>{})));
                }
                break;
            }
            case ObsKind::Binary: {
                if (e.at("args").size() != 2) throw InvariantError("binary observable needs two arguments");
                auto o = ObservableExpr::binary(prim_from(e.at("op")), one_based(e.at("args")[0], i), one_based(e.at("args")[1], i));
                fd.observables.push_back(std::move(o));
                break;
            }
            case ObsKind::Affine: {
                const auto& args = e.at("args");
                const auto& coeffs = e.at("coeffs");
                if (args.size() != coeffs.size()) throw InvariantError("affine args and coeffs differ in length");
                ObservableExpr o;
                o.kind = ObsKind::Affine;
                o.offset = e.value("offset", 0.0);
                for (std::size_t t = 0; t < args.size(); ++t) o.terms.push_back({one_based(args[t], i), coeffs[t].get<double>()});
                fd.observables.push_back(std::move(o));
                break;
            }
            }
        }
        for (const auto& o : j.at("outputs")) fd.outputs.push_back(one_based(o, fd.size()));
        fd.validate();
        return fd;
    } catch (const nlohmann::json::exception& e) {
        throw InvariantError(std::string("malformed decomposition JSON: ") + e.what());
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
}

} // namespace detail

std::string to_json(const FunctionalDecomposition& fd, int indent) { return detail::fd_to_json(fd).dump(indent); }

FunctionalDecomposition fd_from_json(std::string_view text) { return detail::fd_from_json(detail::parse_json(text)); }

} // namespace funcdec
