#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlstm/cell.hpp"

namespace nlstm {

enum class Architecture { Lstm, Stacked, Nlstm };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);

struct ModelConfig {
    Architecture architecture = Architecture::Lstm;
    int layers = 1;         // stack depth
    int nesting_depth = 1;  // total cell levels (nlstm only, >= 2)
    int cell_size = 0;
    int input_size = 0;
    int output_size = 0;
    uint64_t seed = 0;

    bool operator==(const ModelConfig&) const = default;
};

void validate(const ModelConfig& config);

// Input encoding is one-hot straight into the first layer's gate matrices;
// there is no separate embedding table.
struct Model {
    ModelConfig config;
    std::vector<CellParams> cells;  // layer l>0 consumes layer l-1's h
    Matrix proj_w;                  // cell_size x output_size
    Vector proj_b;                  // output_size

    // Visits every tensor in a fixed, documented order: per layer, per level
    // outer-to-inner, gates in (input, forget, cell, output) order, w_x then
    // w_h then b; finally projection.w and projection.b. Vectors visit as
    // 1 x n. Checkpointing, optimizers and counting all share this order.
    void visit_tensors(const std::function<void(const std::string&, std::vector<double>&, int rows,
                                                int cols)>& fn);
    void visit_tensors(const std::function<void(const std::string&, const std::vector<double>&,
                                                int rows, int cols)>& fn) const;
};

Model build_model(const ModelConfig& config, Rng& rng);
Model zeros_like(const Model& m);

int64_t count_parameters(const Model& m);
// Closed-form count from the shape alone; must equal count_parameters.
int64_t model_param_count(const ModelConfig& config);

// Time-major batch: token inputs (one-hot encoded on the fly) or dense
// per-step feature rows; next-token targets or one class per lane.
struct SequenceBatch {
    std::vector<std::vector<int>> token_inputs;  // [t][lane]
    std::vector<Matrix> dense_inputs;            // [t], each batch x input_size
    std::vector<std::vector<int>> token_targets; // [t][lane]
    std::vector<int> class_targets;              // [lane]

    int seq_len() const {
        return static_cast<int>(token_inputs.empty() ? dense_inputs.size() : token_inputs.size());
    }
    int batch() const;
};

using ModelState = std::vector<CellState>;             // one per layer
using ModelCaches = std::vector<std::vector<StepCache>>;  // [t][layer]

ModelState zero_state(const Model& m, int batch);

struct ForwardResult {
    std::vector<Matrix> logits;  // [t], each batch x output_size
    ModelState final_state;
    ModelCaches caches;
};

ForwardResult forward_sequence(const Model& m, const SequenceBatch& batch, const ModelState& state0);
ForwardResult forward_sequence(const Model& m, const SequenceBatch& batch);

struct ModelGrads {
    std::vector<CellParams> cells;
    Matrix proj_w;
    Vector proj_b;
};

ModelGrads zero_grads(const Model& m);

// dlogits carries the full loss scaling (e.g. (softmax-onehot)/(T*B)); the
// backward pass accumulates across time and layers.
ModelGrads backward_sequence(const Model& m, const ModelCaches& caches,
                             const std::vector<Matrix>& dlogits);

// Mean next-token NLL over (time x batch) and the matching dlogits, already
// scaled by 1/(T*B).
std::pair<double, std::vector<Matrix>> lm_loss(const std::vector<Matrix>& logits,
                                               const std::vector<std::vector<int>>& targets);

struct ClassifyResult {
    double loss;  // mean final-step NLL over lanes
    std::vector<int> predicted;
};

ClassifyResult classify_last_step(const Model& m, const SequenceBatch& batch);

// Final-step dlogits (zeros elsewhere), scaled by 1/batch.
std::pair<double, std::vector<Matrix>> classification_loss(const std::vector<Matrix>& logits,
                                                           const std::vector<int>& targets);

Matrix one_hot_rows(const std::vector<int>& ids, int width);

}  // namespace nlstm
