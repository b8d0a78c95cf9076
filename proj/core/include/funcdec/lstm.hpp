#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "funcdec/decomp.hpp"
#include "funcdec/primitive.hpp"

namespace funcdec {

// One LSTM step with N nodes and d inputs. Weight matrices are N x (N + d)
// acting on the stacked vector (h_prev, x).
struct LstmSpec {
    std::size_t N = 1;
    std::size_t d = 1;
    Eigen::MatrixXd W_f, W_i, W_c, W_o;
    Eigen::VectorXd b_f, b_i, b_c, b_o;
    Prim gate = Prim::HardSig;
    Prim state = Prim::Tanh;
    bool output_cell = false;   // also expose c_t as outputs

    void validate() const;

    // Weights and biases uniform in [-scale, scale].
    static LstmSpec random(std::size_t N, std::size_t d, std::uint64_t seed, double scale = 1.0);
    static LstmSpec zeros(std::size_t N, std::size_t d);
};

LstmSpec lstm_from_json(std::string_view text);
std::string lstm_to_json(const LstmSpec& spec, int indent = 2);

// Decomposition with inputs (x_1..x_d, h_1..h_N, c_1..c_N) and outputs h_t
// (then c_t when requested). Products are polarized and affine chains
// folded.
FunctionalDecomposition lstm_ingest(const LstmSpec& spec);

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

// Direct evaluation of one step, independent of any decomposition.
LstmState lstm_step(const LstmSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev);

} // namespace funcdec
