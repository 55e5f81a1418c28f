#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlstm/model.hpp"

namespace nlstm {

enum class OptimizerKind { Adam, RmsProp };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

// Gradients and parameters travel as aligned lists of flat spans, one per
// tensor in the model's visit order.
std::vector<std::span<double>> tensor_spans(Model& m);
std::vector<std::span<double>> tensor_spans(ModelGrads& g);

double global_norm(const std::vector<std::span<double>>& grads);

// If the global L2 norm over all gradients exceeds threshold, every gradient
// is scaled by threshold/norm; otherwise unchanged. Returns the pre-clip norm.
double clip_by_global_norm(std::vector<std::span<double>> grads, double threshold);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t t = 0;
    std::vector<std::vector<double>> m, v;

    static AdamState init(const std::vector<std::span<double>>& params);
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  theta -= lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(std::vector<std::span<double>> params, const std::vector<std::span<double>>& grads,
               AdamState& state, double lr);

struct RmsPropState {
    double decay = 0.9;
    double eps = 1e-8;
    std::vector<std::vector<double>> mean_square;

    static RmsPropState init(const std::vector<std::span<double>>& params);
};

// s <- decay s + (1-decay) g^2;  theta -= lr * g / (sqrt(s) + eps)
void rmsprop_step(std::vector<std::span<double>> params, const std::vector<std::span<double>>& grads,
                  RmsPropState& state, double lr);

}  // namespace nlstm
