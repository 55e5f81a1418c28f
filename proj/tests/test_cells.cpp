#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlstm/cell.hpp"
#include "oracle_helpers.hpp"

using namespace nlstm;

namespace {

Matrix random_matrix(Rng& rng, int r, int c, double scale = 1.0) {
    Matrix m(r, c);
    for (double& x : m.data) x = rng.uniform(-scale, scale);
    return m;
}

std::vector<double> to_std(const Matrix& m, int row = 0) {
    std::vector<double> v(static_cast<size_t>(m.cols));
    for (int j = 0; j < m.cols; ++j) v[static_cast<size_t>(j)] = m(row, j);
    return v;
}

}  // namespace

TEST_CASE("zero cell is a fixpoint: h = c = 0, gates 0.5") {
    for (int levels : {1, 2, 3}) {
        CellParams p = make_cell(4, 3, levels);
        CellState state = CellState::zeros(p, 1);
        Rng rng(5);
        const Matrix x = random_matrix(rng, 1, 4);
        const StepResult r = cell_forward(p, x, state);
        for (double v : r.h.data) CHECK(v == 0.0);
        for (double v : r.state.c.data) CHECK(v == 0.0);
        for (double v : r.cache.i.data) CHECK(v == 0.5);
        for (double v : r.cache.f.data) CHECK(v == 0.5);
        for (double v : r.cache.o.data) CHECK(v == 0.5);
    }
}

TEST_CASE("addition memory with tanh candidate reduces to the reference cell") {
    Rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        const int in = 2 + static_cast<int>(rng.next_u64() % 5);
        const int k = 1 + static_cast<int>(rng.next_u64() % 8);
        CellParams p = make_cell(in, k, 1);
        oracle::randomize_cell(p, rng, 0.8);

        CellState prev = CellState::zeros(p, 1);
        prev.h = random_matrix(rng, 1, k);
        prev.c = random_matrix(rng, 1, k);
        const Matrix x = random_matrix(rng, 1, in);

        const StepResult lib = cell_forward(p, x, prev);
        const oracle::RefWeights w = oracle::extract_weights(p);
        const oracle::RefStep ref = oracle::ref_lstm_forward(w, to_std(x), to_std(prev.h), to_std(prev.c));
        for (int j = 0; j < k; ++j) {
            CHECK(std::fabs(lib.h(0, j) - ref.h[static_cast<size_t>(j)]) <= 1e-12);
            CHECK(std::fabs(lib.state.c(0, j) - ref.c[static_cast<size_t>(j)]) <= 1e-12);
        }

        // Backward against the hand-derived reference.
        const Matrix dh = random_matrix(rng, 1, k);
        CellState next_grad = CellState::zeros(p, 1);
        next_grad.c = random_matrix(rng, 1, k);
        const CellBackward back = cell_backward(p, lib.cache, dh, next_grad);
        const oracle::RefBackward rback = oracle::ref_lstm_backward(
            w, to_std(x), to_std(prev.h), to_std(prev.c), ref, to_std(dh), to_std(next_grad.c));
        for (int a = 0; a < in; ++a)
            CHECK(std::fabs(back.dx(0, a) - rback.dx[static_cast<size_t>(a)]) <= 1e-12);
        for (int j = 0; j < k; ++j) {
            CHECK(std::fabs(back.dstate_prev.h(0, j) - rback.dh_prev[static_cast<size_t>(j)]) <= 1e-12);
            CHECK(std::fabs(back.dstate_prev.c(0, j) - rback.dc_prev[static_cast<size_t>(j)]) <= 1e-12);
        }
        const GateBlock* gates[4] = {&back.dparams.input_gate, &back.dparams.forget_gate,
                                     &back.dparams.cell_gate, &back.dparams.output_gate};
        for (int g = 0; g < 4; ++g) {
            for (int a = 0; a < in; ++a)
                for (int j = 0; j < k; ++j)
                    CHECK(std::fabs(gates[g]->w_x(a, j) - rback.dgrads.wx[g][a][j]) <= 1e-12);
            for (int a = 0; a < k; ++a)
                for (int j = 0; j < k; ++j)
                    CHECK(std::fabs(gates[g]->w_h(a, j) - rback.dgrads.wh[g][a][j]) <= 1e-12);
            for (int j = 0; j < k; ++j)
                CHECK(std::fabs(gates[g]->b[j] - rback.dgrads.b[g][j]) <= 1e-12);
        }
    }
}

TEST_CASE("nested forward matches the straight-line scalar transcription") {
    Rng rng(202);
    CellParams p = make_cell(6, 8, 2);
    oracle::randomize_cell(p, rng, 0.7);
    CHECK(p.acts.candidate == Act::Identity);
    CHECK(p.memory->acts.candidate == Act::Tanh);

    CellState prev = CellState::zeros(p, 1);
    prev.h = random_matrix(rng, 1, 8);
    prev.c = random_matrix(rng, 1, 8, 0.9);
    prev.inner->c = random_matrix(rng, 1, 8);
    const Matrix x = random_matrix(rng, 1, 6);

    const StepResult lib = cell_forward(p, x, prev);
    const oracle::NestedStepOut ref = oracle::nested_depth2_step(
        p, to_std(x), to_std(prev.h), to_std(prev.c), to_std(prev.inner->c));
    for (int j = 0; j < 8; ++j) {
        CHECK(std::fabs(lib.state.c(0, j) - ref.c[static_cast<size_t>(j)]) <= 1e-12);
        CHECK(std::fabs(lib.h(0, j) - ref.h[static_cast<size_t>(j)]) <= 1e-12);
        CHECK(std::fabs(lib.state.inner->c(0, j) - ref.inner_c[static_cast<size_t>(j)]) <= 1e-12);
    }
}

TEST_CASE("zero upstream gradient yields zero gradients everywhere") {
    Rng rng(303);
    CellParams p = make_cell(3, 4, 2);
    oracle::randomize_cell(p, rng);
    CellState prev = CellState::zeros(p, 1);
    prev.h = random_matrix(rng, 1, 4);
    prev.c = random_matrix(rng, 1, 4, 0.5);
    prev.inner->c = random_matrix(rng, 1, 4);
    const StepResult fwd = cell_forward(p, random_matrix(rng, 1, 3), prev);

    const Matrix zero_dh(1, 4);
    const CellBackward back = cell_backward(p, fwd.cache, zero_dh, CellState::zeros(p, 1));
    for (double v : back.dx.data) CHECK(v == 0.0);
    for (double v : back.dstate_prev.h.data) CHECK(v == 0.0);
    for (double v : back.dstate_prev.c.data) CHECK(v == 0.0);
    CellParams dp = back.dparams;
    for (auto span : oracle::cell_spans(dp))
        for (double v : span) CHECK(v == 0.0);
}

namespace {

// Two-step scalar loss sum(alpha .* h_t) exercising both the recurrent and
// the memory paths; analytic gradients accumulated across both steps.
void fd_check_cell(int levels, uint64_t seed) {
    Rng rng(seed);
    const int in = 3, k = 5;
    CellParams p = make_cell(in, k, levels);
    oracle::randomize_cell(p, rng, 0.6);
    const Matrix x0 = random_matrix(rng, 1, in);
    const Matrix x1 = random_matrix(rng, 1, in);
    Matrix alpha = random_matrix(rng, 1, k);

    auto loss = [&]() {
        CellState state = CellState::zeros(p, 1);
        double total = 0.0;
        for (const Matrix* x : {&x0, &x1}) {
            StepResult r = cell_forward(p, *x, state);
            state = std::move(r.state);
            for (int j = 0; j < k; ++j) total += alpha(0, j) * r.h(0, j);
        }
        return total;
    };

    // Analytic pass.
    CellState state = CellState::zeros(p, 1);
    StepResult s0 = cell_forward(p, x0, state);
    StepResult s1 = cell_forward(p, x1, s0.state);
    CellParams dacc = zeros_like(p);
    Matrix dx;
    CellState sg1;
    cell_backward_accum(p, s1.cache, alpha, CellState::zeros(p, 1), dacc, &dx, &sg1);
    CellState sg0;
    cell_backward_accum(p, s0.cache, alpha, sg1, dacc, &dx, &sg0);

    const auto fail = oracle::check_gradients(oracle::cell_spans(p), oracle::cell_spans(dacc), loss);
    INFO("levels=", levels, " at ", fail.where, " analytic=", fail.analytic,
         " numeric=", fail.numeric);
    CHECK_FALSE(fail.failed);
}

}  // namespace

TEST_CASE("finite differences validate the backward pass at depths 1..3") {
    fd_check_cell(1, 404);
    fd_check_cell(2, 505);
    fd_check_cell(3, 606);
}

TEST_CASE("parameter counts: closed form and identities") {
    CHECK(cell_param_count(49, 100, 1) == 60000);
    CHECK(cell_param_count(50, 600, 2) == 4444800);
    // Nested depth-2 equals a 2-layer stack at equal width, for any input.
    Rng rng(707);
    for (int trial = 0; trial < 20; ++trial) {
        const int in = 1 + static_cast<int>(rng.next_u64() % 200);
        const int k = 1 + static_cast<int>(rng.next_u64() % 300);
        CHECK(cell_param_count(in, k, 2) ==
              cell_param_count(in, k, 1) + cell_param_count(k, k, 1));
    }
    // The formula counts exactly the tensors the cell owns.
    CellParams p = make_cell(7, 9, 3);
    int64_t entries = 0;
    for (auto span : oracle::cell_spans(p)) entries += static_cast<int64_t>(span.size());
    CHECK(entries == cell_param_count(7, 9, 3));
}

TEST_CASE("gate and state boundedness") {
    Rng rng(808);
    for (int trial = 0; trial < 10; ++trial) {
        const int levels = 1 + static_cast<int>(rng.next_u64() % 3);
        CellParams p = make_cell(4, 6, levels);
        oracle::randomize_cell(p, rng, 1.2);
        CellState state = CellState::zeros(p, 2);
        for (int t = 0; t < 4; ++t) {
            const StepResult r = cell_forward(p, random_matrix(rng, 2, 4, 1.2), state);
            state = r.state;
            for (double v : r.cache.i.data) { CHECK(v > 0.0); CHECK(v < 1.0); }
            for (double v : r.cache.f.data) { CHECK(v > 0.0); CHECK(v < 1.0); }
            for (double v : r.cache.o.data) { CHECK(v > 0.0); CHECK(v < 1.0); }
            for (double v : r.h.data) { CHECK(v > -1.0); CHECK(v < 1.0); }
            if (levels > 1)
                for (double v : state.c.data) { CHECK(v > -1.0); CHECK(v < 1.0); }
        }
    }
}

TEST_CASE("addition memory's cell state is unbounded") {
    // Saturated input/forget gates and a large candidate push c past 1.
    CellParams p = make_cell(2, 1, 1);
    p.input_gate.b[0] = 20.0;   // i ~ 1
    p.forget_gate.b[0] = 20.0;  // f ~ 1
    p.cell_gate.b[0] = 3.0;     // g = tanh(3) ~ 0.995
    CellState state = CellState::zeros(p, 1);
    const Matrix x(1, 2);
    for (int t = 0; t < 3; ++t) state = cell_forward(p, x, state).state;
    CHECK(state.c(0, 0) > 1.0);
}

TEST_CASE("forward and backward are pure: repeated calls agree bitwise") {
    Rng rng(909);
    CellParams p = make_cell(3, 4, 2);
    oracle::randomize_cell(p, rng);
    CellState prev = CellState::zeros(p, 1);
    prev.h = random_matrix(rng, 1, 4);
    const Matrix x = random_matrix(rng, 1, 3);
    const StepResult a = cell_forward(p, x, prev);
    const StepResult b = cell_forward(p, x, prev);
    CHECK(a.h.data == b.h.data);
    CHECK(a.state.c.data == b.state.c.data);
    CHECK(a.state.inner->c.data == b.state.inner->c.data);
}

TEST_CASE("batched rows equal independent single-lane runs") {
    Rng rng(111);
    CellParams p = make_cell(3, 5, 2);
    oracle::randomize_cell(p, rng);
    const Matrix x = random_matrix(rng, 3, 3);
    const StepResult batched = cell_forward(p, x, CellState::zeros(p, 3));
    for (int lane = 0; lane < 3; ++lane) {
        Matrix xi(1, 3);
        for (int j = 0; j < 3; ++j) xi(0, j) = x(lane, j);
        const StepResult single = cell_forward(p, xi, CellState::zeros(p, 1));
        for (int j = 0; j < 5; ++j)
            CHECK(batched.h(lane, j) == single.h(0, j));
    }
}

TEST_CASE("shape mismatches are rejected") {
    CellParams p = make_cell(3, 4, 2);
    CHECK_THROWS_AS(cell_forward(p, Matrix(1, 5), CellState::zeros(p, 1)), ShapeError);
    CellParams plain = make_cell(3, 4, 1);
    // State nesting must mirror the memory structure.
    CHECK_THROWS_AS(cell_forward(p, Matrix(1, 3), CellState::zeros(plain, 1)), ShapeError);
}
