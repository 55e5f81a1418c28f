#include "nlstm/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace nlstm {

double bpc(double mean_nll) { return mean_nll / std::log(2.0); }

double perplexity(double mean_nll) { return std::exp(mean_nll); }

std::vector<MetricRecord> evaluate(const Model& m, const std::vector<SequenceBatch>& batches,
                                   TaskKind kind, const std::string& split, int epoch) {
    double nll_sum = 0.0;
    int64_t positions = 0;
    int64_t correct = 0;
    int64_t lanes = 0;

    for (const SequenceBatch& batch : batches) {
        if (kind == TaskKind::LanguageModel) {
            ForwardResult fwd = forward_sequence(m, batch);
            for (size_t t = 0; t < fwd.logits.size(); ++t) {
                auto [loss_sum, grad] = softmax_xent_rows(fwd.logits[t], batch.token_targets[t]);
                (void)grad;
                nll_sum += loss_sum;
                positions += fwd.logits[t].rows;
            }
        } else {
            ForwardResult fwd = forward_sequence(m, batch);
            const Matrix& last = fwd.logits.back();
            auto [loss_sum, grad] = softmax_xent_rows(last, batch.class_targets);
            (void)grad;
            nll_sum += loss_sum;
            positions += last.rows;
            lanes += last.rows;
            for (int i = 0; i < last.rows; ++i) {
                const double* row = last.row(i);
                int best = 0;
                for (int j = 1; j < last.cols; ++j)
                    if (row[j] > row[best]) best = j;
                if (best == batch.class_targets[static_cast<size_t>(i)]) ++correct;
            }
        }
    }

    const double mean_nll = positions > 0 ? nll_sum / static_cast<double>(positions) : 0.0;
    std::vector<MetricRecord> out;
    out.push_back({"nll", mean_nll, split, epoch});
    if (kind == TaskKind::LanguageModel) {
        out.push_back({"bpc", bpc(mean_nll), split, epoch});
        out.push_back({"perplexity", perplexity(mean_nll), split, epoch});
    } else {
        out.push_back({"accuracy", lanes > 0 ? static_cast<double>(correct) / lanes : 0.0, split,
                       epoch});
    }
    return out;
}

std::string metric_line(const MetricRecord& r) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", r.value);
    return std::to_string(r.epoch) + "\t" + r.split + "\t" + r.name + "\t" + buf;
}

}  // namespace nlstm
