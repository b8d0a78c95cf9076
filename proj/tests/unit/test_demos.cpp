#include <doctest.h>

#include <funcdec/dha.hpp>
#include <funcdec/dag.hpp>
#include <funcdec/error.hpp>
#include <funcdec/lstm.hpp>

#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace funcdec;

namespace {

oracle::LstmWeights to_oracle(const LstmSpec& s) {
    oracle::LstmWeights w;
    w.N = s.N;
    w.d = s.d;
    auto rows = [&](const Eigen::MatrixXd& M) {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(M.rows()));
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.cols(); ++c) out[static_cast<std::size_t>(r)].push_back(M(r, c));
        }
        return out;
    };
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    w.Wf = rows(s.W_f);
    w.Wi = rows(s.W_i);
    w.Wc = rows(s.W_c);
    w.Wo = rows(s.W_o);
    w.bf = vec(s.b_f);
    w.bi = vec(s.b_i);
    w.bc = vec(s.b_c);
    w.bo = vec(s.b_o);
    return w;
}

} // namespace

TEST_CASE("lstm decomposition size and stability under simplification") {
    const auto spec = LstmSpec::random(5, 1, 11);
    const auto fd = lstm_ingest(spec);
    CHECK(fd.n_x == 1 + 5 + 5);
    CHECK(fd.outputs.size() == 5);
    CHECK(fd.size() > 100);
    CHECK(dedup(fd).size() == fd.size());
    CHECK(reduce(fold_affine(fd)).size() == fd.size());
}

TEST_CASE("lstm decomposition matches a direct step") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        for (bool cell : {false, true}) {
            auto spec = LstmSpec::random(3, 2, seed, 1.5);
            spec.output_cell = cell;
            const auto fd = lstm_ingest(spec);
            const auto w = to_oracle(spec);
            std::mt19937_64 rng(seed + 100);
            std::uniform_real_distribution<double> u(-1, 1);
            for (int k = 0; k < 1000; ++k) {
                std::vector<double> x(2), h(3), c(3), in;
                for (auto* v : {&x, &h, &c}) {
                    for (auto& e : *v) e = u(rng);
                    in.insert(in.end(), v->begin(), v->end());
                }
                std::vector<double> h_out, c_out;
                oracle::lstm_direct(w, x, h, c, h_out, c_out);
                const auto y = eval_fd(fd, in);
                REQUIRE(y.size() == (cell ? 6u : 3u));
                for (std::size_t r = 0; r < 3; ++r) {
                    CHECK(std::abs(y[r] - h_out[r]) <= 1e-12);
                    if (cell) CHECK(std::abs(y[3 + r] - c_out[r]) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("lstm special cases") {
    const auto z = LstmSpec::zeros(2, 1);
    const auto fd = lstm_ingest(z);
    // Zero weights: gates are 0.5, candidate 0, so c = 0.5 c_prev and h = 0.5 tanh(0.5 c_prev).
    const double in[] = {0.7, 0.3, -0.2, 0.8, -0.4};
    const auto y = eval_fd(fd, in);
    CHECK(std::abs(y[0] - 0.5 * std::tanh(0.4)) < 1e-15);
    CHECK(std::abs(y[1] - 0.5 * std::tanh(-0.2)) < 1e-15);
    CHECK(hard_sigmoid(3.0) == 1.0);
    CHECK(hard_sigmoid(-3.0) == 0.0);
    CHECK(hard_sigmoid(1.0) == doctest::Approx(0.7));

    const auto spec = LstmSpec::random(2, 3, 9);
    const auto back = lstm_from_json(lstm_to_json(spec));
    CHECK(back.N == 2);
    CHECK(back.d == 3);
    CHECK(back.W_c.isApprox(spec.W_c));
    CHECK(back.b_o.isApprox(spec.b_o));
    auto bad = spec;
    bad.W_f.resize(2, 2);
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    CHECK_THROWS(lstm_from_json("{\"N\": 1}"));
}

TEST_CASE("lstm step agrees with the oracle") {
    const auto spec = LstmSpec::random(4, 2, 21);
    const auto w = to_oracle(spec);
    Eigen::VectorXd x(2), h(4), c(4);
    x << 0.1, -0.9;
    h << 0.2, 0.3, -0.5, 0.9;
    c << -1, 0.5, 0.25, 0;
    const auto s = lstm_step(spec, x, h, c);
    std::vector<double> h_out, c_out;
    oracle::lstm_direct(w, {0.1, -0.9}, {0.2, 0.3, -0.5, 0.9}, {-1, 0.5, 0.25, 0}, h_out, c_out);
    for (int r = 0; r < 4; ++r) {
        CHECK(s.h(r) == doctest::Approx(h_out[static_cast<std::size_t>(r)]).epsilon(1e-14));
        CHECK(s.c(r) == doctest::Approx(c_out[static_cast<std::size_t>(r)]).epsilon(1e-14));
    }
}

TEST_CASE("automaton decomposition counts") {
    CHECK(dha_decomposition().size() == 16);
    CHECK(dha_reduced().size() == 13);
}

TEST_CASE("automaton examples") {
    for (const auto& fd : {dha_decomposition(), dha_reduced()}) {
        auto s = dha_evaluate(fd, -1, 0);
        CHECK(s.mode == 1);
        CHECK(s.next == -2.0);
        s = dha_evaluate(fd, 1, 0);
        CHECK(s.mode == 2);
        CHECK(s.next == 2.0);
        s = dha_evaluate(fd, -0.5, 2);
        CHECK(s.mode == 3);
        CHECK(s.next == 2.0);
    }
    CHECK(dha_simulate(0.0, 0.0).mode == 2);
}

TEST_CASE("property: automaton decomposition agrees with the trace oracle") {
    const auto basic = dha_decomposition();
    const auto red = dha_reduced();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ux(-2, 2), uu(-1, 1);
    for (int k = 0; k < 1000; ++k) {
        const double x = ux(rng), u = uu(rng);
        const auto want = oracle::dha_trace(x, u);
        for (const auto* fd : {&basic, &red}) {
            const auto got = dha_evaluate(*fd, x, u);
            CHECK(got.mode == want.mode);
            CHECK(std::abs(got.next - want.next) <= 1e-12);
        }
        const auto sim = dha_simulate(x, u);
        CHECK(sim.mode == want.mode);
        CHECK(sim.next == want.next);
    }
}
