#include "nlstm/trace.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace nlstm {

namespace {

// Level labels in recording order for one stack layer.
std::vector<std::string> layer_levels(const Model& m, int layer) {
    const bool multi = m.config.layers > 1;
    const std::string prefix = multi ? "layer" + std::to_string(layer + 1) + "-" : "";
    const CellParams& cell = m.cells[static_cast<size_t>(layer)];
    std::vector<std::string> out;
    if (!cell.nested()) {
        out.push_back("layer-" + std::to_string(layer + 1));
        return out;
    }
    out.push_back(prefix + "outer");
    for (int d = 1; d < cell.levels(); ++d)
        out.push_back(prefix + "inner-" + std::to_string(d));
    return out;
}

}  // namespace

ActivationTrace trace_activations(const Model& m, const std::vector<int>& tokens,
                                  const CharVocab& vocab, int unit_lo, int unit_hi) {
    if (unit_lo < 0 || unit_hi < unit_lo || unit_hi >= m.config.cell_size)
        throw std::out_of_range("trace: unit range " + std::to_string(unit_lo) + ".." +
                                std::to_string(unit_hi) + " exceeds cell size " +
                                std::to_string(m.config.cell_size));
    ActivationTrace trace;
    for (int l = 0; l < static_cast<int>(m.cells.size()); ++l)
        for (const std::string& level : layer_levels(m, l)) trace.levels.push_back(level);

    ModelState state = zero_state(m, 1);
    for (size_t t = 0; t < tokens.size(); ++t) {
        Matrix x = one_hot_rows({tokens[t]}, m.config.input_size);
        for (size_t l = 0; l < m.cells.size(); ++l) {
            StepResult step = cell_forward(m.cells[l], x, state[l]);
            x = step.h;
            state[l] = std::move(step.state);
        }
        const unsigned char input = vocab.at(tokens[t]);
        size_t level_idx = 0;
        for (size_t l = 0; l < m.cells.size(); ++l) {
            const bool nested = m.cells[l].nested();
            const CellState* cs = &state[l];
            int depth = 0;
            while (cs != nullptr) {
                const std::string& level = trace.levels[level_idx++];
                // For a nested cell the outer value is already bounded; inner
                // and plain cell values are unconstrained, so record tanh.
                const bool raw = nested && depth == 0;
                for (int u = unit_lo; u <= unit_hi; ++u) {
                    const double v = cs->c(0, u);
                    trace.rows.push_back({static_cast<int>(t), input, level, u,
                                          raw ? v : std::tanh(v)});
                }
                cs = cs->inner.get();
                ++depth;
            }
        }
    }

    // Mean absolute per-step change per level.
    const int units = unit_hi - unit_lo + 1;
    const size_t nlevels = trace.levels.size();
    std::map<std::string, std::pair<double, int64_t>> acc;
    const size_t per_step = nlevels * static_cast<size_t>(units);
    for (size_t r = per_step; r < trace.rows.size(); ++r) {
        const TraceRow& cur = trace.rows[r];
        const TraceRow& prev = trace.rows[r - per_step];
        auto& a = acc[cur.level];
        a.first += std::fabs(cur.value - prev.value);
        a.second += 1;
    }
    for (const std::string& level : trace.levels) {
        const auto it = acc.find(level);
        trace.stats.push_back(
            {level, it == acc.end() || it->second.second == 0
                        ? 0.0
                        : it->second.first / static_cast<double>(it->second.second)});
    }
    return trace;
}

namespace {

std::string escape_input(unsigned char c) {
    if (c == '"') return "\"\"\"\"";  // quoted, inner quote doubled
    if (c >= 0x20 && c < 0x7f) return std::string("\"") + static_cast<char>(c) + "\"";
    char buf[8];
    std::snprintf(buf, sizeof(buf), "\"\\x%02x\"", c);
    return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ActivationTrace& trace) {
    out << "t,input,level,unit,value\n";
    char buf[64];
    for (const TraceRow& r : trace.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.value);
        out << r.t << ',' << escape_input(r.input) << ',' << r.level << ',' << r.unit << ',' << buf
            << '\n';
    }
}

}  // namespace nlstm
