#include "funcdec/lstm.hpp"

#include "funcdec/error.hpp"
#include "funcdec/graphbuild.hpp"
#include "json_detail.hpp"

#include <random>

namespace funcdec {

using nlohmann::json;

namespace {

void check_matrix(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, std::size_t N, std::size_t d, const char* name) {
    const auto rows = static_cast<Eigen::Index>(N), cols = static_cast<Eigen::Index>(N + d);
    if (W.rows() != rows || W.cols() != cols) {
        throw DimensionError(std::string("W_") + name + " must be " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (b.size() != rows) throw DimensionError(std::string("b_") + name + " must have length " + std::to_string(rows));
    if (!W.allFinite() || !b.allFinite()) throw DomainError(std::string("non-finite weights in gate ") + name);
}

bool is_elementwise(Prim p) { return arity(p) == 1 && p != Prim::Composite && p != Prim::PowK && p != Prim::Recip && p != Prim::PowBase; }

Eigen::MatrixXd matrix_from(const json& j, std::size_t rows, std::size_t cols, const char* what) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<double> flat;
    if (!j.is_array()) throw InvariantError(std::string(what) + " must be an array");
    for (const auto& e : j) {
        if (e.is_array()) {
            for (const auto& v : e) flat.push_back(v.get<double>());
        } else {
            flat.push_back(e.get<double>());
        }
    }
    if (flat.size() != rows * cols) {
        throw DimensionError(std::string(what) + " has " + std::to_string(flat.size()) + " entries, expected " + std::to_string(rows * cols));
    }
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * cols + c];
    }
    return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Prim prim_named(const json& j, const char* what) {
    const auto p = function_from_name(j.get<std::string>());
    if (!p || !is_elementwise(*p)) throw DomainError(std::string("unknown ") + what + " function '" + j.get<std::string>() + "'");
    return *p;
}

} // namespace

void LstmSpec::validate() const {
    if (N == 0 || d == 0) throw DimensionError("LSTM needs N >= 1 and d >= 1");
    check_matrix(W_f, b_f, N, d, "f");
    check_matrix(W_i, b_i, N, d, "i");
    check_matrix(W_c, b_c, N, d, "c");
    check_matrix(W_o, b_o, N, d, "o");
    if (!is_elementwise(gate)) throw DomainError("gate must be a unary grammar function");
    if (!is_elementwise(state)) throw DomainError("state must be a unary grammar function");
}

LstmSpec LstmSpec::zeros(std::size_t N, std::size_t d) {
    LstmSpec s;
    s.N = N;
    s.d = d;
    const auto n = static_cast<Eigen::Index>(N), m = static_cast<Eigen::Index>(N + d);
    for (auto* W : {&s.W_f, &s.W_i, &s.W_c, &s.W_o}) *W = Eigen::MatrixXd::Zero(n, m);
    for (auto* b : {&s.b_f, &s.b_i, &s.b_c, &s.b_o}) *b = Eigen::VectorXd::Zero(n);
    return s;
}

LstmSpec LstmSpec::random(std::size_t N, std::size_t d, std::uint64_t seed, double scale) {
    LstmSpec s = zeros(N, d);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto* W : {&s.W_f, &s.W_i, &s.W_c, &s.W_o}) {
        for (Eigen::Index k = 0; k < W->size(); ++k) W->data()[k] = u(rng);
    }
    for (auto* b : {&s.b_f, &s.b_i, &s.b_c, &s.b_o}) {
        for (Eigen::Index k = 0; k < b->size(); ++k) (*b)(k) = u(rng);
    }
    return s;
}

LstmSpec lstm_from_json(std::string_view text) {
    const json j = detail::parse_json(text);
    try {
        LstmSpec s;
        s.N = j.at("N").get<std::size_t>();
        s.d = j.at("d").get<std::size_t>();
        const char* names[] = {"f", "i", "c", "o"};
        Eigen::MatrixXd* Ws[] = {&s.W_f, &s.W_i, &s.W_c, &s.W_o};
        Eigen::VectorXd* bs[] = {&s.b_f, &s.b_i, &s.b_c, &s.b_o};
        for (int k = 0; k < 4; ++k) {
            const std::string wn = std::string("W_") + names[k], bn = std::string("b_") + names[k];
            *Ws[k] = matrix_from(j.at(wn), s.N, s.N + s.d, wn.c_str());
            *bs[k] = matrix_from(j.at(bn), s.N, 1, bn.c_str()).col(0);
        }
        if (j.contains("gate")) s.gate = prim_named(j["gate"], "gate");
        if (j.contains("state")) s.state = prim_named(j["state"], "state");
        if (j.contains("output_cell")) s.output_cell = j["output_cell"].get<bool>();
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw InvariantError(std::string("LSTM weights: ") + e.what());
    }
}

std::string lstm_to_json(const LstmSpec& s, int indent) {
    s.validate();
    json j;
    j["N"] = s.N;
    j["d"] = s.d;
    j["W_f"] = matrix_json(s.W_f);
    j["W_i"] = matrix_json(s.W_i);
    j["W_c"] = matrix_json(s.W_c);
    j["W_o"] = matrix_json(s.W_o);
    j["b_f"] = std::vector<double>(s.b_f.data(), s.b_f.data() + s.b_f.size());
    j["b_i"] = std::vector<double>(s.b_i.data(), s.b_i.data() + s.b_i.size());
    j["b_c"] = std::vector<double>(s.b_c.data(), s.b_c.data() + s.b_c.size());
    j["b_o"] = std::vector<double>(s.b_o.data(), s.b_o.data() + s.b_o.size());
    j["gate"] = std::string(name(s.gate));
    j["state"] = std::string(name(s.state));
    j["output_cell"] = s.output_cell;
    return j.dump(indent);
}

FunctionalDecomposition lstm_ingest(const LstmSpec& s) {
    s.validate();
    const std::size_t N = s.N, d = s.d;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < d; ++k) names.push_back(d == 1 ? "x" : "x" + std::to_string(k + 1));
    for (std::size_t k = 0; k < N; ++k) names.push_back("h" + std::to_string(k + 1));
    for (std::size_t k = 0; k < N; ++k) names.push_back("c" + std::to_string(k + 1));
    DecompositionBuilder b(d + 2 * N, false, names);
    auto x = [&](std::size_t k) { return b.input(k); };
    auto h = [&](std::size_t k) { return b.input(d + k); };
    auto c = [&](std::size_t k) { return b.input(d + N + k); };
    // W . (h, x) + bias, one affine observable per row.
    auto layer = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& bias, std::size_t row) {
        std::vector<std::pair<Operand, double>> t;
        const auto r = static_cast<Eigen::Index>(row);
        for (std::size_t k = 0; k < N; ++k) t.emplace_back(h(k), W(r, static_cast<Eigen::Index>(k)));
        for (std::size_t k = 0; k < d; ++k) t.emplace_back(x(k), W(r, static_cast<Eigen::Index>(N + k)));
        return b.affine(t, bias(r));
    };
    std::vector<Operand> h_t(N), c_t(N);
    for (std::size_t n = 0; n < N; ++n) {
        const Operand f = b.unary(s.gate, layer(s.W_f, s.b_f, n));
        const Operand i = b.unary(s.gate, layer(s.W_i, s.b_i, n));
        const Operand g = b.unary(s.state, layer(s.W_c, s.b_c, n));
        const Operand o = b.unary(s.gate, layer(s.W_o, s.b_o, n));
        c_t[n] = b.add(b.mul(f, c(n)), b.mul(i, g));
        h_t[n] = b.mul(o, b.unary(s.state, c_t[n]));
    }
    std::vector<Operand> outs = h_t;
    if (s.output_cell) outs.insert(outs.end(), c_t.begin(), c_t.end());
    return fold_affine(rewrite_products(b.finish(outs)));
}

LstmState lstm_step(const LstmSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev) {
    s.validate();
    const auto N = static_cast<Eigen::Index>(s.N);
    if (x.size() != static_cast<Eigen::Index>(s.d) || h_prev.size() != N || c_prev.size() != N) {
        throw DimensionError("lstm_step: state or input has the wrong length");
    }
    Eigen::VectorXd z(N + x.size());
    z << h_prev, x;
    auto act = [](Prim p, const Eigen::VectorXd& v) {
        Eigen::VectorXd r(v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k) r(k) = apply_unary(p, v(k));
        return r;
    };
    const Eigen::VectorXd f = act(s.gate, s.W_f * z + s.b_f);
    const Eigen::VectorXd i = act(s.gate, s.W_i * z + s.b_i);
    const Eigen::VectorXd g = act(s.state, s.W_c * z + s.b_c);
    const Eigen::VectorXd o = act(s.gate, s.W_o * z + s.b_o);
    LstmState out;
    out.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    out.h = o.cwiseProduct(act(s.state, out.c));
    return out;
}

} // namespace funcdec
