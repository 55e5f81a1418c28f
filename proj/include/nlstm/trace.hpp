#pragma once

#include <iosfwd>

#include "nlstm/dataset.hpp"

namespace nlstm {

struct TraceRow {
    int t = 0;
    unsigned char input = 0;
    std::string level;
    int unit = 0;
    double value = 0.0;
};

struct LevelStat {
    std::string level;
    double mean_abs_step_change = 0.0;  // mean over t>=1 and units of |v_t - v_{t-1}|
};

struct ActivationTrace {
    std::vector<std::string> levels;  // fixed order: per layer, outer to inner
    std::vector<TraceRow> rows;       // one per (t, level, unit)
    std::vector<LevelStat> stats;
};

// Feeds the token sequence one step at a time from a zero state and records,
// per step and requested unit, the cell value of every level: a nested
// level's outer cell directly (it is already squashed), inner and plain cell
// values through tanh. unit range is inclusive.
ActivationTrace trace_activations(const Model& m, const std::vector<int>& tokens,
                                  const CharVocab& vocab, int unit_lo, int unit_hi);

// CSV with header t,input,level,unit,value. The input character is quoted,
// inner quotes doubled, bytes outside printable ASCII written as \xNN.
void write_trace_csv(std::ostream& out, const ActivationTrace& trace);

}  // namespace nlstm
