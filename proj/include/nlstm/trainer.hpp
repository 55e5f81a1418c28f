#pragma once

#include <iosfwd>

#include "nlstm/metrics.hpp"
#include "nlstm/optimizer.hpp"

namespace nlstm {

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 0.002;
    int batch_size = 32;
    int seq_len = 100;
    double clip_threshold = 1.0;
    int epochs = 1;
    uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double rmsprop_decay = 0.9;
    double rmsprop_eps = 1e-8;

    bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
    int epoch = 0;
    std::vector<MetricRecord> metrics;  // train + valid records for this epoch
    double wall_seconds = 0.0;          // not serialized
};

struct TrainResult {
    std::vector<EpochRecord> history;
    Model best;
    int best_epoch = 0;        // 0 when epochs == 0 (initial model)
    double best_valid = 0.0;   // selection metric (valid nll)
};

// One sequential, shuffle-free pass over the training batches per epoch with
// clip + optimizer step per batch, then a full validation evaluation. Keeps
// the model with the minimum validation nll (earliest epoch on ties). A
// non-finite batch loss aborts with a diagnostic naming epoch and batch.
TrainResult run_training(const Model& initial, const std::vector<SequenceBatch>& train,
                         const std::vector<SequenceBatch>& valid, const TrainConfig& config,
                         TaskKind kind, std::ostream* log = nullptr);

// Line-delimited history: epoch<TAB>split<TAB>metric_name<TAB>value.
// Wall time is deliberately absent so identical runs serialize identically.
void write_history(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace nlstm
