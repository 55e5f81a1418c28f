#include "nlstm/model.hpp"

#include <cmath>

namespace nlstm {

std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::Lstm: return "lstm";
        case Architecture::Stacked: return "stacked";
        case Architecture::Nlstm: return "nlstm";
    }
    return "?";
}

Architecture architecture_from_string(const std::string& s) {
    if (s == "lstm") return Architecture::Lstm;
    if (s == "stacked") return Architecture::Stacked;
    if (s == "nlstm") return Architecture::Nlstm;
    throw ConfigError("unknown architecture '" + s + "' (expected lstm|stacked|nlstm)");
}

void validate(const ModelConfig& c) {
    if (c.cell_size < 1 || c.input_size < 1 || c.output_size < 1)
        throw ConfigError("model config: cell/input/output sizes must be >= 1");
    if (c.layers < 1) throw ConfigError("model config: layers must be >= 1");
    switch (c.architecture) {
        case Architecture::Lstm:
            if (c.layers != 1) throw ConfigError("model config: lstm requires layers = 1");
            if (c.nesting_depth > 1)
                throw ConfigError("model config: lstm cannot have nesting_depth > 1");
            break;
        case Architecture::Stacked:
            if (c.nesting_depth > 1)
                throw ConfigError("model config: stacked cannot have nesting_depth > 1");
            break;
        case Architecture::Nlstm:
            if (c.nesting_depth < 2)
                throw ConfigError("model config: nlstm requires nesting_depth >= 2");
            break;
    }
}

namespace {

int levels_of(const ModelConfig& c) {
    return c.architecture == Architecture::Nlstm ? c.nesting_depth : 1;
}

void visit_gate(const std::string& prefix, GateBlock& g,
                const std::function<void(const std::string&, std::vector<double>&, int, int)>& fn) {
    fn(prefix + ".w_x", g.w_x.data, g.w_x.rows, g.w_x.cols);
    fn(prefix + ".w_h", g.w_h.data, g.w_h.rows, g.w_h.cols);
    fn(prefix + ".b", g.b.data, 1, g.b.len());
}

void visit_cell(const std::string& prefix, CellParams& p,
                const std::function<void(const std::string&, std::vector<double>&, int, int)>& fn) {
    visit_gate(prefix + ".input_gate", p.input_gate, fn);
    visit_gate(prefix + ".forget_gate", p.forget_gate, fn);
    visit_gate(prefix + ".cell_gate", p.cell_gate, fn);
    visit_gate(prefix + ".output_gate", p.output_gate, fn);
    if (p.memory) visit_cell(prefix + ".memory", *p.memory, fn);
}

}  // namespace

void Model::visit_tensors(
    const std::function<void(const std::string&, std::vector<double>&, int, int)>& fn) {
    for (size_t l = 0; l < cells.size(); ++l)
        visit_cell("layer" + std::to_string(l), cells[l], fn);
    fn("projection.w", proj_w.data, proj_w.rows, proj_w.cols);
    fn("projection.b", proj_b.data, 1, proj_b.len());
}

void Model::visit_tensors(const std::function<void(const std::string&, const std::vector<double>&,
                                                   int, int)>& fn) const {
    const_cast<Model*>(this)->visit_tensors(
        [&fn](const std::string& name, std::vector<double>& data, int r, int c) {
            fn(name, data, r, c);
        });
}

Model build_model(const ModelConfig& config, Rng& rng) {
    validate(config);
    Model m;
    m.config = config;
    const int levels = levels_of(config);
    for (int l = 0; l < config.layers; ++l) {
        const int in = l == 0 ? config.input_size : config.cell_size;
        m.cells.push_back(make_cell(in, config.cell_size, levels));
        init_cell(m.cells.back(), rng, /*glorot_input=*/l == 0);
    }
    m.proj_w = orthogonal(rng, config.cell_size, config.output_size);
    m.proj_b = Vector(config.output_size);
    return m;
}

Model zeros_like(const Model& src) {
    Model m;
    m.config = src.config;
    for (const CellParams& c : src.cells) m.cells.push_back(zeros_like(c));
    m.proj_w = Matrix(src.proj_w.rows, src.proj_w.cols);
    m.proj_b = Vector(src.proj_b.len());
    return m;
}

int64_t count_parameters(const Model& m) {
    int64_t n = 0;
    m.visit_tensors([&n](const std::string&, const std::vector<double>& data, int, int) {
        n += static_cast<int64_t>(data.size());
    });
    return n;
}

int64_t model_param_count(const ModelConfig& c) {
    validate(c);
    const int levels = levels_of(c);
    int64_t n = 0;
    for (int l = 0; l < c.layers; ++l)
        n += cell_param_count(l == 0 ? c.input_size : c.cell_size, c.cell_size, levels);
    n += static_cast<int64_t>(c.cell_size) * c.output_size + c.output_size;
    return n;
}

int SequenceBatch::batch() const {
    if (!token_inputs.empty()) return static_cast<int>(token_inputs.front().size());
    if (!dense_inputs.empty()) return dense_inputs.front().rows;
    return 0;
}

ModelState zero_state(const Model& m, int batch) {
    ModelState s;
    for (const CellParams& c : m.cells) s.push_back(CellState::zeros(c, batch));
    return s;
}

Matrix one_hot_rows(const std::vector<int>& ids, int width) {
    Matrix x(static_cast<int>(ids.size()), width);
    for (size_t r = 0; r < ids.size(); ++r) {
        const int id = ids[r];
        if (id < 0 || id >= width)
            throw DataError("token id " + std::to_string(id) + " out of range for input width " +
                            std::to_string(width));
        x(static_cast<int>(r), id) = 1.0;
    }
    return x;
}

ForwardResult forward_sequence(const Model& m, const SequenceBatch& batch, const ModelState& state0) {
    const int T = batch.seq_len();
    if (T == 0) throw ShapeError("forward_sequence: empty batch");
    if (state0.size() != m.cells.size())
        throw ShapeError("forward_sequence: state layer count does not match model");

    ForwardResult out;
    out.final_state = state0;
    out.caches.resize(static_cast<size_t>(T));
    out.logits.reserve(static_cast<size_t>(T));

    for (int t = 0; t < T; ++t) {
        Matrix x = batch.token_inputs.empty()
                       ? batch.dense_inputs[static_cast<size_t>(t)]
                       : one_hot_rows(batch.token_inputs[static_cast<size_t>(t)], m.config.input_size);
        out.caches[static_cast<size_t>(t)].reserve(m.cells.size());
        for (size_t l = 0; l < m.cells.size(); ++l) {
            StepResult step = cell_forward(m.cells[l], x, out.final_state[l]);
            x = step.h;
            out.final_state[l] = std::move(step.state);
            out.caches[static_cast<size_t>(t)].push_back(std::move(step.cache));
        }
        Matrix logits = matmul(x, m.proj_w);
        add_row_inplace(logits, m.proj_b);
        out.logits.push_back(std::move(logits));
    }
    return out;
}

ForwardResult forward_sequence(const Model& m, const SequenceBatch& batch) {
    return forward_sequence(m, batch, zero_state(m, batch.batch()));
}

ModelGrads zero_grads(const Model& m) {
    ModelGrads g;
    for (const CellParams& c : m.cells) g.cells.push_back(zeros_like(c));
    g.proj_w = Matrix(m.proj_w.rows, m.proj_w.cols);
    g.proj_b = Vector(m.proj_b.len());
    return g;
}

ModelGrads backward_sequence(const Model& m, const ModelCaches& caches,
                             const std::vector<Matrix>& dlogits) {
    const int T = static_cast<int>(caches.size());
    if (dlogits.size() != caches.size())
        throw ConsistencyError("backward_sequence: dlogits length does not match caches");
    if (T == 0) throw ConsistencyError("backward_sequence: empty caches");
    const int L = static_cast<int>(m.cells.size());
    if (static_cast<int>(caches.front().size()) != L)
        throw ConsistencyError("backward_sequence: cache layer count does not match model");
    const int batch = caches.front().front().x.rows;

    ModelGrads g = zero_grads(m);
    // Recurrent state gradients per layer, produced at step t+1, consumed at t.
    std::vector<CellState> sg_next;
    for (const CellParams& c : m.cells) sg_next.push_back(CellState::zeros(c, batch));

    for (int t = T - 1; t >= 0; --t) {
        const Matrix& dlog = dlogits[static_cast<size_t>(t)];
        // Projection path: logits = h_top * proj_w + proj_b. h is not cached,
        // so rebuild it from the top cache.
        const StepCache& top_cache = caches[static_cast<size_t>(t)].back();
        Matrix h_top_val = hadamard(top_cache.o, activate(top_cache.c_new, m.cells.back().acts.output));
        add_inplace(g.proj_w, matmul_tn(h_top_val, dlog));
        {
            const Vector sums = col_sums(dlog);
            for (int j = 0; j < g.proj_b.len(); ++j) g.proj_b[j] += sums[j];
        }
        Matrix d_from_above = matmul_nt(dlog, m.proj_w);  // gradient on top layer's h

        for (int l = L - 1; l >= 0; --l) {
            Matrix dx;
            CellState sg_prev;
            cell_backward_accum(m.cells[static_cast<size_t>(l)],
                                caches[static_cast<size_t>(t)][static_cast<size_t>(l)], d_from_above,
                                sg_next[static_cast<size_t>(l)], g.cells[static_cast<size_t>(l)], &dx,
                                &sg_prev, /*need_dx=*/l > 0);
            sg_next[static_cast<size_t>(l)] = std::move(sg_prev);
            d_from_above = std::move(dx);
        }
    }
    return g;
}

std::pair<double, std::vector<Matrix>> lm_loss(const std::vector<Matrix>& logits,
                                               const std::vector<std::vector<int>>& targets) {
    if (logits.size() != targets.size())
        throw ConsistencyError("lm_loss: logits/targets length mismatch");
    const int T = static_cast<int>(logits.size());
    const int B = logits.front().rows;
    const double scale = 1.0 / (static_cast<double>(T) * B);
    double total = 0.0;
    std::vector<Matrix> dlogits;
    dlogits.reserve(logits.size());
    for (int t = 0; t < T; ++t) {
        auto [loss_sum, grad] = softmax_xent_rows(logits[static_cast<size_t>(t)],
                                                  targets[static_cast<size_t>(t)]);
        total += loss_sum;
        scale_inplace(grad, scale);
        dlogits.push_back(std::move(grad));
    }
    return {total * scale, std::move(dlogits)};
}

std::pair<double, std::vector<Matrix>> classification_loss(const std::vector<Matrix>& logits,
                                                           const std::vector<int>& targets) {
    const int T = static_cast<int>(logits.size());
    const int B = logits.front().rows;
    auto [loss_sum, grad] = softmax_xent_rows(logits.back(), targets);
    scale_inplace(grad, 1.0 / B);
    std::vector<Matrix> dlogits;
    dlogits.reserve(static_cast<size_t>(T));
    for (int t = 0; t < T - 1; ++t)
        dlogits.emplace_back(B, logits.front().cols);
    dlogits.push_back(std::move(grad));
    return {loss_sum / B, std::move(dlogits)};
}

ClassifyResult classify_last_step(const Model& m, const SequenceBatch& batch) {
    ForwardResult fwd = forward_sequence(m, batch);
    const Matrix& last = fwd.logits.back();
    auto [loss_sum, grad] = softmax_xent_rows(last, batch.class_targets);
    (void)grad;
    ClassifyResult r;
    r.loss = loss_sum / last.rows;
    r.predicted.reserve(static_cast<size_t>(last.rows));
    for (int i = 0; i < last.rows; ++i) {
        const double* row = last.row(i);
        int best = 0;
        for (int j = 1; j < last.cols; ++j)
            if (row[j] > row[best]) best = j;
        r.predicted.push_back(best);
    }
    return r;
}

}  // namespace nlstm
