#pragma once

#include <string>
#include <vector>

#include "nlstm/model.hpp"

namespace nlstm {

enum class TaskKind { LanguageModel, Classification };

struct MetricRecord {
    std::string name;  // nll | bpc | perplexity | accuracy
    double value = 0.0;
    std::string split;  // train | valid | test
    int epoch = 0;
};

double bpc(double mean_nll);         // mean_nll / ln 2
double perplexity(double mean_nll);  // exp(mean_nll); overflows to +inf

// Mean per-position NLL over the split (no gradients), with the derived
// bpc/perplexity; classification adds accuracy over final-step argmax.
std::vector<MetricRecord> evaluate(const Model& m, const std::vector<SequenceBatch>& batches,
                                   TaskKind kind, const std::string& split, int epoch);

// Line format shared by history files and eval output:
// epoch<TAB>split<TAB>metric_name<TAB>value
std::string metric_line(const MetricRecord& r);

}  // namespace nlstm
