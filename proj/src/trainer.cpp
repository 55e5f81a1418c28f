#include "nlstm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace nlstm {

TrainResult run_training(const Model& initial, const std::vector<SequenceBatch>& train,
                         const std::vector<SequenceBatch>& valid, const TrainConfig& config,
                         TaskKind kind, std::ostream* log) {
    if (config.epochs < 0) throw ConfigError("run_training: epochs must be >= 0");
    if (config.learning_rate < 0.0) throw ConfigError("run_training: learning rate must be >= 0");

    TrainResult result;
    result.best = initial;
    result.best_epoch = 0;
    result.best_valid = std::numeric_limits<double>::infinity();
    if (config.epochs == 0) return result;
    if (train.empty()) throw DataError("run_training: no training batches");

    Model model = initial;
    auto params = tensor_spans(model);
    AdamState adam = AdamState::init(params);
    adam.beta1 = config.adam_beta1;
    adam.beta2 = config.adam_beta2;
    adam.eps = config.adam_eps;
    RmsPropState rms = RmsPropState::init(params);
    rms.decay = config.rmsprop_decay;
    rms.eps = config.rmsprop_eps;

    bool have_best = false;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double nll_sum = 0.0;
        int64_t batches = 0;
        for (size_t bi = 0; bi < train.size(); ++bi) {
            const SequenceBatch& batch = train[bi];
            ForwardResult fwd = forward_sequence(model, batch);
            auto [loss, dlogits] = kind == TaskKind::LanguageModel
                                       ? lm_loss(fwd.logits, batch.token_targets)
                                       : classification_loss(fwd.logits, batch.class_targets);
            if (!std::isfinite(loss))
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(bi));
            ModelGrads grads = backward_sequence(model, fwd.caches, dlogits);
            auto grad_spans = tensor_spans(grads);
            clip_by_global_norm(grad_spans, config.clip_threshold);
            if (config.optimizer == OptimizerKind::Adam)
                adam_step(params, grad_spans, adam, config.learning_rate);
            else
                rmsprop_step(params, grad_spans, rms, config.learning_rate);
            nll_sum += loss;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        const double train_nll = nll_sum / static_cast<double>(batches);
        rec.metrics.push_back({"nll", train_nll, "train", epoch});
        if (kind == TaskKind::LanguageModel)
            rec.metrics.push_back({"bpc", bpc(train_nll), "train", epoch});

        double valid_nll = train_nll;
        if (!valid.empty()) {
            auto valid_metrics = evaluate(model, valid, kind, "valid", epoch);
            valid_nll = valid_metrics.front().value;  // nll is first
            for (auto& r : valid_metrics) rec.metrics.push_back(std::move(r));
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log) {
            *log << "epoch " << epoch << ": train nll " << train_nll;
            if (!valid.empty()) *log << ", valid nll " << valid_nll;
            *log << " (" << rec.wall_seconds << " s)\n";
        }
        result.history.push_back(std::move(rec));

        if (!have_best || valid_nll < result.best_valid) {
            have_best = true;
            result.best_valid = valid_nll;
            result.best_epoch = epoch;
            result.best = model;
        }
    }
    return result;
}

void write_history(std::ostream& out, const std::vector<EpochRecord>& history) {
    for (const EpochRecord& rec : history)
        for (const MetricRecord& m : rec.metrics) out << metric_line(m) << "\n";
}

}  // namespace nlstm
