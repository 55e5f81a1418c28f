#pragma once

#include <cstdint>
#include <memory>

#include "nlstm/numerics.hpp"

namespace nlstm {

// One gate's weight/bias triple: pre-activation = x*w_x + h_prev*w_h + b.
struct GateBlock {
    Matrix w_x;  // input_size x cell_size
    Matrix w_h;  // cell_size x cell_size
    Vector b;    // cell_size
};

// Activation assignment for one cell level. Defaults follow the recurrent
// convention: sigmoid gates, tanh candidate and output squashing. A nested
// outer level uses an identity candidate (set by make_cell); every slot stays
// independently configurable.
struct CellActs {
    Act gate_i = Act::Sigmoid;
    Act gate_f = Act::Sigmoid;
    Act gate_o = Act::Sigmoid;
    Act candidate = Act::Tanh;  // applied to the cell-gate pre-activation
    Act output = Act::Tanh;     // applied to the cell state before the output gate
};

// Parameters of one recurrent cell. `memory` selects the stateful function
// that combines f.*c_prev with i.*g: null means plain addition (the classic
// update), otherwise another cell of the same width consumes i.*g as its
// input and f.*c_prev as its previous hidden state, and the new cell value is
// that inner cell's output. Nesting recurses to arbitrary depth.
struct CellParams {
    int input_size = 0;
    int cell_size = 0;
    GateBlock input_gate, forget_gate, cell_gate, output_gate;
    CellActs acts;
    std::unique_ptr<CellParams> memory;  // null => addition

    CellParams() = default;
    CellParams(const CellParams& other);
    CellParams& operator=(const CellParams& other);
    CellParams(CellParams&&) = default;
    CellParams& operator=(CellParams&&) = default;

    bool nested() const { return memory != nullptr; }
    int levels() const { return 1 + (memory ? memory->levels() : 0); }
};

// All tensors zeroed, same structure and activation assignment.
CellParams zeros_like(const CellParams& p);

// Construct an uninitialized (zero-weight) cell. levels = 1 gives a plain
// cell with a tanh candidate; levels >= 2 gives a nested cell whose outer
// candidate is identity and whose inner levels are plain-style tanh cells of
// the same width.
CellParams make_cell(int input_size, int cell_size, int levels);

// Glorot for the first layer's input maps, semi-orthogonal QR everywhere
// else (recurrent maps, inner levels, deeper layers), zero biases. Draw
// order: per level outer-to-inner, gates in (input, forget, cell, output)
// order, w_x before w_h.
void init_cell(CellParams& p, Rng& rng, bool glorot_input);

// Closed-form parameter count: 4*(input+cell+1)*cell for the outer gate-set
// plus 4*(2*cell+1)*cell per additional nesting level.
int64_t cell_param_count(int input_size, int cell_size, int levels);

// Per-lane recurrent state, batch along matrix rows. `inner` mirrors the
// memory structure; only the cell value persists for inner levels (their
// previous hidden input is recomputed each step as f .* c_prev).
struct CellState {
    Matrix h;  // batch x cell
    Matrix c;  // batch x cell
    std::unique_ptr<CellState> inner;

    CellState() = default;
    CellState(const CellState& other);
    CellState& operator=(const CellState& other);
    CellState(CellState&&) = default;
    CellState& operator=(CellState&&) = default;

    static CellState zeros(const CellParams& p, int batch);
};

// Everything the backward pass needs from one forward step.
struct StepCache {
    Matrix x, h_prev, c_prev;
    Matrix i, f, o, g;  // gate activations; g = candidate activation
    Matrix c_new;
    std::unique_ptr<StepCache> inner;  // its x is i.*g, its h_prev is f.*c_prev
};

struct StepResult {
    Matrix h;  // == state.h, returned for convenience
    CellState state;
    StepCache cache;
};

StepResult cell_forward(const CellParams& p, const Matrix& x, const CellState& prev);

struct CellBackward {
    Matrix dx;
    CellState dstate_prev;  // h/c hold gradients w.r.t. the previous state
    CellParams dparams;
};

// Reverse-mode step. dh is the direct upstream gradient on this step's h
// output; dstate_next carries gradients arriving from the following step
// (dh via the recurrent use of h, dc via the memory path, recursively for
// inner cell values). Parameter gradients accumulate across time in dacc.
void cell_backward_accum(const CellParams& p, const StepCache& cache, const Matrix& dh,
                         const CellState& dstate_next, CellParams& dacc, Matrix* dx_out,
                         CellState* dstate_prev_out, bool need_dx = true);

CellBackward cell_backward(const CellParams& p, const StepCache& cache, const Matrix& dh,
                           const CellState& dstate_next);

// Single-lane convenience wrappers for per-sequence use.
StepResult cell_forward(const CellParams& p, const Vector& x, const CellState& prev);

}  // namespace nlstm
