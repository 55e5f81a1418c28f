#pragma once

#include <string>
#include <vector>

#include "nlstm/trainer.hpp"

namespace nlstm {

enum class Task { PtbChar, Text8, MnistGlimpses, CustomText };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

// Flat key-value run configuration ('key = value' lines, '#' comments).
// serialize/parse round-trip losslessly; unknown keys are config errors.
struct RunConfig {
    Task task = Task::CustomText;
    Architecture architecture = Architecture::Nlstm;
    int layers = 1;
    int nesting_depth = 2;
    int cell_size = 64;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 0.002;
    int batch_size = 32;
    int seq_len = 100;
    double clip_threshold = 1.0;
    int epochs = 1;
    uint64_t seed = 1;
    std::string train_path, valid_path, test_path;          // text tasks
    std::string train_images, train_labels;                 // mnist
    std::string test_images, test_labels;
    int valid_count = 10000;                                 // mnist: tail of train held out
    std::string out_dir;

    bool operator==(const RunConfig&) const = default;

    ModelConfig model_config(int input_size, int output_size) const;
    TrainConfig train_config() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
void apply_override(RunConfig& config, const std::string& key, const std::string& value);
std::string serialize(const RunConfig& config);

// ---- parameter accounting (params subcommand) ----

struct ParamRow {
    Architecture architecture;
    int n;          // stack layers, or nesting depth for nlstm
    int cell_size;
    int64_t params;
    std::string display;  // paper-style rounding: >=1M -> x.xxM, else x.xk
    bool configured;      // row for the active config rather than a baseline
};

std::string display_count(int64_t n);
std::string group_digits(int64_t n);

// The configured model plus baseline shapes at matched budgets. The three
// dataset tasks carry fixed reference grids (vocab 50 / 27 / 49-in 10-out);
// custom_text solves the budget match from the configured model's count.
std::vector<ParamRow> params_report(const RunConfig& config);

// Canonical input/output width cmd_params assumes per task.
std::pair<int, int> task_io_sizes(Task task);

}  // namespace nlstm
