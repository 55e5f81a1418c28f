#include "nlstm/optimizer.hpp"

#include <cmath>
#include <limits>

namespace nlstm {

std::string to_string(OptimizerKind k) {
    return k == OptimizerKind::Adam ? "adam" : "rmsprop";
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::Adam;
    if (s == "rmsprop") return OptimizerKind::RmsProp;
    throw ConfigError("unknown optimizer '" + s + "' (expected adam|rmsprop)");
}

std::vector<std::span<double>> tensor_spans(Model& m) {
    std::vector<std::span<double>> spans;
    m.visit_tensors([&spans](const std::string&, std::vector<double>& data, int, int) {
        spans.emplace_back(data);
    });
    return spans;
}

std::vector<std::span<double>> tensor_spans(ModelGrads& g) {
    std::vector<std::span<double>> spans;
    auto visit_gate = [&spans](GateBlock& gate) {
        spans.emplace_back(gate.w_x.data);
        spans.emplace_back(gate.w_h.data);
        spans.emplace_back(gate.b.data);
    };
    std::function<void(CellParams&)> visit_cell = [&](CellParams& c) {
        visit_gate(c.input_gate);
        visit_gate(c.forget_gate);
        visit_gate(c.cell_gate);
        visit_gate(c.output_gate);
        if (c.memory) visit_cell(*c.memory);
    };
    for (CellParams& c : g.cells) visit_cell(c);
    spans.emplace_back(g.proj_w.data);
    spans.emplace_back(g.proj_b.data);
    return spans;
}

double global_norm(const std::vector<std::span<double>>& grads) {
    double sq = 0.0;
    for (const auto& s : grads)
        for (double x : s) sq += x * x;
    return std::sqrt(sq);
}

double clip_by_global_norm(std::vector<std::span<double>> grads, double threshold) {
    if (threshold <= 0.0) throw ConfigError("clip_by_global_norm: threshold must be > 0");
    const double norm0 = global_norm(grads);
    // Rescaling once can leave the recomputed norm an ulp above the
    // threshold; iterate until the values stop moving so clipping is exactly
    // idempotent. Converges in one or two passes.
    double norm = norm0;
    while (norm > threshold) {
        const double scale = threshold / norm;
        bool changed = false;
        for (auto& s : grads)
            for (double& x : s) {
                const double y = x * scale;
                if (y != x) {
                    x = y;
                    changed = true;
                }
            }
        if (!changed) break;
        norm = global_norm(grads);
    }
    return norm0;
}

AdamState AdamState::init(const std::vector<std::span<double>>& params) {
    AdamState st;
    for (const auto& p : params) {
        st.m.emplace_back(p.size(), 0.0);
        st.v.emplace_back(p.size(), 0.0);
    }
    return st;
}

void adam_step(std::vector<std::span<double>> params, const std::vector<std::span<double>>& grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ConsistencyError("adam_step: param/grad/state layout mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        auto p = params[i];
        const auto g = grads[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (p.size() != g.size() || p.size() != m.size())
            throw ConsistencyError("adam_step: tensor size mismatch");
        for (size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

RmsPropState RmsPropState::init(const std::vector<std::span<double>>& params) {
    RmsPropState st;
    for (const auto& p : params) st.mean_square.emplace_back(p.size(), 0.0);
    return st;
}

void rmsprop_step(std::vector<std::span<double>> params, const std::vector<std::span<double>>& grads,
                  RmsPropState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.mean_square.size())
        throw ConsistencyError("rmsprop_step: param/grad/state layout mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        auto p = params[i];
        const auto g = grads[i];
        auto& s = state.mean_square[i];
        if (p.size() != g.size() || p.size() != s.size())
            throw ConsistencyError("rmsprop_step: tensor size mismatch");
        for (size_t j = 0; j < p.size(); ++j) {
            s[j] = state.decay * s[j] + (1.0 - state.decay) * g[j] * g[j];
            p[j] -= lr * g[j] / (std::sqrt(s[j]) + state.eps);
        }
    }
}

}  // namespace nlstm
