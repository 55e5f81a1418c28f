#include "nlstm/cell.hpp"

#include <string>

namespace nlstm {

CellParams::CellParams(const CellParams& other)
    : input_size(other.input_size),
      cell_size(other.cell_size),
      input_gate(other.input_gate),
      forget_gate(other.forget_gate),
      cell_gate(other.cell_gate),
      output_gate(other.output_gate),
      acts(other.acts),
      memory(other.memory ? std::make_unique<CellParams>(*other.memory) : nullptr) {}

CellParams& CellParams::operator=(const CellParams& other) {
    if (this == &other) return *this;
    input_size = other.input_size;
    cell_size = other.cell_size;
    input_gate = other.input_gate;
    forget_gate = other.forget_gate;
    cell_gate = other.cell_gate;
    output_gate = other.output_gate;
    acts = other.acts;
    memory = other.memory ? std::make_unique<CellParams>(*other.memory) : nullptr;
    return *this;
}

CellState::CellState(const CellState& other)
    : h(other.h), c(other.c), inner(other.inner ? std::make_unique<CellState>(*other.inner) : nullptr) {}

CellState& CellState::operator=(const CellState& other) {
    if (this == &other) return *this;
    h = other.h;
    c = other.c;
    inner = other.inner ? std::make_unique<CellState>(*other.inner) : nullptr;
    return *this;
}

CellState CellState::zeros(const CellParams& p, int batch) {
    CellState s;
    s.h = Matrix(batch, p.cell_size);
    s.c = Matrix(batch, p.cell_size);
    if (p.memory) s.inner = std::make_unique<CellState>(CellState::zeros(*p.memory, batch));
    return s;
}

namespace {

GateBlock zero_gate(int input_size, int cell_size) {
    GateBlock g;
    g.w_x = Matrix(input_size, cell_size);
    g.w_h = Matrix(cell_size, cell_size);
    g.b = Vector(cell_size);
    return g;
}

GateBlock zeros_like_gate(const GateBlock& g) {
    GateBlock z;
    z.w_x = Matrix(g.w_x.rows, g.w_x.cols);
    z.w_h = Matrix(g.w_h.rows, g.w_h.cols);
    z.b = Vector(g.b.len());
    return z;
}

// Pre-activation for one gate: x*w_x + h_prev*w_h + b per row.
Matrix gate_preact(const Matrix& x, const Matrix& h_prev, const GateBlock& g) {
    Matrix a = matmul(x, g.w_x);
    add_inplace(a, matmul(h_prev, g.w_h));
    add_row_inplace(a, g.b);
    return a;
}

void init_gate(GateBlock& g, Rng& rng, bool glorot_input) {
    g.w_x = glorot_input ? glorot_uniform(rng, g.w_x.rows, g.w_x.cols)
                         : orthogonal(rng, g.w_x.rows, g.w_x.cols);
    g.w_h = orthogonal(rng, g.w_h.rows, g.w_h.cols);
    for (double& b : g.b.data) b = 0.0;
}

void accumulate_gate_grads(GateBlock& acc, const Matrix& x, const Matrix& h_prev, const Matrix& da) {
    add_inplace(acc.w_x, matmul_tn(x, da));
    add_inplace(acc.w_h, matmul_tn(h_prev, da));
    const Vector sums = col_sums(da);
    for (int j = 0; j < acc.b.len(); ++j) acc.b[j] += sums[j];
}

}  // namespace

CellParams zeros_like(const CellParams& p) {
    CellParams z;
    z.input_size = p.input_size;
    z.cell_size = p.cell_size;
    z.input_gate = zeros_like_gate(p.input_gate);
    z.forget_gate = zeros_like_gate(p.forget_gate);
    z.cell_gate = zeros_like_gate(p.cell_gate);
    z.output_gate = zeros_like_gate(p.output_gate);
    z.acts = p.acts;
    if (p.memory) z.memory = std::make_unique<CellParams>(zeros_like(*p.memory));
    return z;
}

CellParams make_cell(int input_size, int cell_size, int levels) {
    if (input_size < 1 || cell_size < 1 || levels < 1)
        throw ConfigError("make_cell: sizes and levels must be >= 1");
    CellParams p;
    p.input_size = input_size;
    p.cell_size = cell_size;
    p.input_gate = zero_gate(input_size, cell_size);
    p.forget_gate = zero_gate(input_size, cell_size);
    p.cell_gate = zero_gate(input_size, cell_size);
    p.output_gate = zero_gate(input_size, cell_size);
    if (levels > 1) {
        p.acts.candidate = Act::Identity;  // inner cell does the squashing
        p.memory = std::make_unique<CellParams>(make_cell(cell_size, cell_size, levels - 1));
    }
    return p;
}

void init_cell(CellParams& p, Rng& rng, bool glorot_input) {
    init_gate(p.input_gate, rng, glorot_input);
    init_gate(p.forget_gate, rng, glorot_input);
    init_gate(p.cell_gate, rng, glorot_input);
    init_gate(p.output_gate, rng, glorot_input);
    if (p.memory) init_cell(*p.memory, rng, false);
}

int64_t cell_param_count(int input_size, int cell_size, int levels) {
    const int64_t k = cell_size;
    int64_t count = 4 * (input_size + k + 1) * k;
    if (levels > 1) count += cell_param_count(cell_size, cell_size, levels - 1);
    return count;
}

StepResult cell_forward(const CellParams& p, const Matrix& x, const CellState& prev) {
    if (x.cols != p.input_size)
        throw ShapeError("cell_forward: input width " + std::to_string(x.cols) +
                         " does not match cell input_size " + std::to_string(p.input_size));
    if (prev.h.cols != p.cell_size || prev.h.rows != x.rows || prev.c.rows != x.rows)
        throw ShapeError("cell_forward: state shape " + shape_str(prev.h) +
                         " does not match batch " + std::to_string(x.rows) + ", cell_size " +
                         std::to_string(p.cell_size));
    if (static_cast<bool>(prev.inner) != static_cast<bool>(p.memory))
        throw ShapeError("cell_forward: state nesting does not mirror the memory function");

    StepResult r;
    StepCache& k = r.cache;
    k.x = x;
    k.h_prev = prev.h;
    k.c_prev = prev.c;

    k.i = activate(gate_preact(x, prev.h, p.input_gate), p.acts.gate_i);
    k.f = activate(gate_preact(x, prev.h, p.forget_gate), p.acts.gate_f);
    k.g = activate(gate_preact(x, prev.h, p.cell_gate), p.acts.candidate);
    k.o = activate(gate_preact(x, prev.h, p.output_gate), p.acts.gate_o);

    const Matrix retained = hadamard(k.f, prev.c);  // f .* c_prev
    const Matrix written = hadamard(k.i, k.g);      // i .* g

    if (!p.memory) {
        k.c_new = add(retained, written);
    } else {
        // The inner cell reads i.*g as input and f.*c_prev as its previous
        // hidden state; the new cell value is the inner cell's output.
        CellState inner_prev;
        inner_prev.h = retained;
        inner_prev.c = prev.inner->c;
        if (prev.inner->inner) inner_prev.inner = std::make_unique<CellState>(*prev.inner->inner);
        StepResult inner = cell_forward(*p.memory, written, inner_prev);
        k.c_new = inner.h;
        k.inner = std::make_unique<StepCache>(std::move(inner.cache));
        r.state.inner = std::make_unique<CellState>(std::move(inner.state));
    }

    r.h = hadamard(k.o, activate(k.c_new, p.acts.output));
    r.state.h = r.h;
    r.state.c = k.c_new;
    return r;
}

StepResult cell_forward(const CellParams& p, const Vector& x, const CellState& prev) {
    return cell_forward(p, row_matrix(x), prev);
}

void cell_backward_accum(const CellParams& p, const StepCache& k, const Matrix& dh,
                         const CellState& dstate_next, CellParams& dacc, Matrix* dx_out,
                         CellState* dstate_prev_out, bool need_dx) {
    if (k.x.cols != p.input_size || k.i.cols != p.cell_size)
        throw ConsistencyError("cell_backward: cache does not match params");
    if (static_cast<bool>(k.inner) != static_cast<bool>(p.memory))
        throw ConsistencyError("cell_backward: cache nesting does not match the memory function");

    // Upstream on h_t: direct consumers plus the next step's recurrent use.
    Matrix dh_total = dh;
    add_inplace(dh_total, dstate_next.h);

    const Matrix c_act = activate(k.c_new, p.acts.output);
    const Matrix do_ = hadamard(dh_total, c_act);

    // dc = future memory-path gradient + this step's h = o .* act(c) path.
    Matrix dc = dstate_next.c;
    for (size_t idx = 0; idx < dc.data.size(); ++idx)
        dc.data[idx] += dh_total.data[idx] * k.o.data[idx] *
                        act_grad_from_value(p.acts.output, c_act.data[idx]);

    // Memory backward: gradients w.r.t. the written value i.*g and the
    // retained value f.*c_prev. Addition passes dc straight through to both.
    Matrix d_written, d_retained;
    CellState dstate_prev;
    if (!p.memory) {
        d_written = dc;
        d_retained = std::move(dc);
    } else {
        CellState inner_next;
        inner_next.h = Matrix(dc.rows, dc.cols);  // inner h is not recurrent
        inner_next.c = dstate_next.inner ? dstate_next.inner->c : Matrix(dc.rows, dc.cols);
        if (dstate_next.inner && dstate_next.inner->inner)
            inner_next.inner = std::make_unique<CellState>(*dstate_next.inner->inner);
        CellState inner_prev;
        cell_backward_accum(*p.memory, *k.inner, dc, inner_next, *dacc.memory, &d_written,
                            &inner_prev, true);
        d_retained = std::move(inner_prev.h);
        // Only the inner cell value flows to the previous step.
        inner_prev.h = Matrix(d_retained.rows, d_retained.cols);
        dstate_prev.inner = std::make_unique<CellState>(std::move(inner_prev));
    }

    const Matrix di = hadamard(d_written, k.g);
    const Matrix dg = hadamard(d_written, k.i);
    const Matrix df = hadamard(d_retained, k.c_prev);
    dstate_prev.c = hadamard(d_retained, k.f);

    auto deltas = [](const Matrix& grad, const Matrix& act_value, Act kind) {
        Matrix d(grad.rows, grad.cols);
        for (size_t idx = 0; idx < d.data.size(); ++idx)
            d.data[idx] = grad.data[idx] * act_grad_from_value(kind, act_value.data[idx]);
        return d;
    };
    const Matrix da_i = deltas(di, k.i, p.acts.gate_i);
    const Matrix da_f = deltas(df, k.f, p.acts.gate_f);
    const Matrix da_g = deltas(dg, k.g, p.acts.candidate);
    const Matrix da_o = deltas(do_, k.o, p.acts.gate_o);

    accumulate_gate_grads(dacc.input_gate, k.x, k.h_prev, da_i);
    accumulate_gate_grads(dacc.forget_gate, k.x, k.h_prev, da_f);
    accumulate_gate_grads(dacc.cell_gate, k.x, k.h_prev, da_g);
    accumulate_gate_grads(dacc.output_gate, k.x, k.h_prev, da_o);

    Matrix dh_prev = matmul_nt(da_i, p.input_gate.w_h);
    add_inplace(dh_prev, matmul_nt(da_f, p.forget_gate.w_h));
    add_inplace(dh_prev, matmul_nt(da_g, p.cell_gate.w_h));
    add_inplace(dh_prev, matmul_nt(da_o, p.output_gate.w_h));
    dstate_prev.h = std::move(dh_prev);

    if (need_dx && dx_out) {
        Matrix dx = matmul_nt(da_i, p.input_gate.w_x);
        add_inplace(dx, matmul_nt(da_f, p.forget_gate.w_x));
        add_inplace(dx, matmul_nt(da_g, p.cell_gate.w_x));
        add_inplace(dx, matmul_nt(da_o, p.output_gate.w_x));
        *dx_out = std::move(dx);
    } else if (dx_out) {
        *dx_out = Matrix(k.x.rows, k.x.cols);
    }
    if (dstate_prev_out) *dstate_prev_out = std::move(dstate_prev);
}

CellBackward cell_backward(const CellParams& p, const StepCache& cache, const Matrix& dh,
                           const CellState& dstate_next) {
    CellBackward out;
    out.dparams = zeros_like(p);
    cell_backward_accum(p, cache, dh, dstate_next, out.dparams, &out.dx, &out.dstate_prev);
    return out;
}

}  // namespace nlstm
