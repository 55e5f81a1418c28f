#include "nlstm/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlstm/dataset.hpp"

namespace nlstm {

std::string to_string(Task t) {
    switch (t) {
        case Task::PtbChar: return "ptb_char";
        case Task::Text8: return "text8";
        case Task::MnistGlimpses: return "mnist_glimpses";
        case Task::CustomText: return "custom_text";
    }
    return "?";
}

Task task_from_string(const std::string& s) {
    if (s == "ptb_char") return Task::PtbChar;
    if (s == "text8") return Task::Text8;
    if (s == "mnist_glimpses") return Task::MnistGlimpses;
    if (s == "custom_text") return Task::CustomText;
    throw ConfigError("unknown task '" + s + "' (expected ptb_char|text8|mnist_glimpses|custom_text)");
}

ModelConfig RunConfig::model_config(int input_size, int output_size) const {
    ModelConfig mc;
    mc.architecture = architecture;
    mc.layers = layers;
    mc.nesting_depth = architecture == Architecture::Nlstm ? nesting_depth : 1;
    mc.cell_size = cell_size;
    mc.input_size = input_size;
    mc.output_size = output_size;
    mc.seed = seed;
    return mc;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.optimizer = optimizer;
    tc.learning_rate = learning_rate;
    tc.batch_size = batch_size;
    tc.seq_len = seq_len;
    tc.clip_threshold = clip_threshold;
    tc.epochs = epochs;
    tc.seed = seed;
    return tc;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long n = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(n);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not an unsigned integer");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    }
}

}  // namespace

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "task") c.task = task_from_string(value);
    else if (key == "architecture") c.architecture = architecture_from_string(value);
    else if (key == "layers") c.layers = parse_int(key, value);
    else if (key == "nesting_depth") c.nesting_depth = parse_int(key, value);
    else if (key == "cell_size") c.cell_size = parse_int(key, value);
    else if (key == "optimizer") c.optimizer = optimizer_from_string(value);
    else if (key == "learning_rate") c.learning_rate = parse_double(key, value);
    else if (key == "batch_size") c.batch_size = parse_int(key, value);
    else if (key == "seq_len") c.seq_len = parse_int(key, value);
    else if (key == "clip_threshold") c.clip_threshold = parse_double(key, value);
    else if (key == "epochs") c.epochs = parse_int(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "train_path") c.train_path = value;
    else if (key == "valid_path") c.valid_path = value;
    else if (key == "test_path") c.test_path = value;
    else if (key == "train_images") c.train_images = value;
    else if (key == "train_labels") c.train_labels = value;
    else if (key == "test_images") c.test_images = value;
    else if (key == "test_labels") c.test_labels = value;
    else if (key == "valid_count") c.valid_count = parse_int(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        apply_override(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize(const RunConfig& c) {
    std::ostringstream out;
    char num[64];
    auto put = [&out](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
    auto putd = [&](const std::string& k, double v) {
        std::snprintf(num, sizeof(num), "%.17g", v);
        put(k, num);
    };
    put("task", to_string(c.task));
    put("architecture", to_string(c.architecture));
    put("layers", std::to_string(c.layers));
    put("nesting_depth", std::to_string(c.nesting_depth));
    put("cell_size", std::to_string(c.cell_size));
    put("optimizer", to_string(c.optimizer));
    putd("learning_rate", c.learning_rate);
    put("batch_size", std::to_string(c.batch_size));
    put("seq_len", std::to_string(c.seq_len));
    putd("clip_threshold", c.clip_threshold);
    put("epochs", std::to_string(c.epochs));
    put("seed", std::to_string(c.seed));
    put("train_path", c.train_path);
    put("valid_path", c.valid_path);
    put("test_path", c.test_path);
    put("train_images", c.train_images);
    put("train_labels", c.train_labels);
    put("test_images", c.test_images);
    put("test_labels", c.test_labels);
    put("valid_count", std::to_string(c.valid_count));
    put("out_dir", c.out_dir);
    return out.str();
}

std::string display_count(int64_t n) {
    char buf[32];
    if (n >= 1000000)
        std::snprintf(buf, sizeof(buf), "%.2fM", static_cast<double>(n) / 1e6);
    else
        std::snprintf(buf, sizeof(buf), "%.1fk", static_cast<double>(n) / 1e3);
    return buf;
}

std::string group_digits(int64_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    const int len = static_cast<int>(digits.size());
    for (int i = 0; i < len; ++i) {
        if (i > 0 && (len - i) % 3 == 0) out += ',';
        out += digits[static_cast<size_t>(i)];
    }
    return out;
}

std::pair<int, int> task_io_sizes(Task task) {
    switch (task) {
        case Task::PtbChar: return {50, 50};
        case Task::Text8: return {27, 27};
        case Task::MnistGlimpses: return {49, 10};
        case Task::CustomText: return {0, 0};  // resolved from data
    }
    return {0, 0};
}

namespace {

int64_t shape_count(Architecture arch, int n, int cell, int in, int out) {
    ModelConfig mc;
    mc.architecture = arch;
    mc.layers = arch == Architecture::Nlstm ? 1 : n;
    mc.nesting_depth = arch == Architecture::Nlstm ? n : 1;
    mc.cell_size = cell;
    mc.input_size = in;
    mc.output_size = out;
    return model_param_count(mc);
}

ParamRow make_row(Architecture arch, int n, int cell, int in, int out, bool configured) {
    const int64_t count = shape_count(arch, n, cell, in, out);
    return {arch, n, cell, count, display_count(count), configured};
}

// Largest cell size whose count stays <= budget; +1 overshoots.
int solve_cell(Architecture arch, int n, int in, int out, int64_t budget) {
    int lo = 1, hi = 1;
    while (shape_count(arch, n, hi, in, out) <= budget) hi *= 2;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (shape_count(arch, n, mid, in, out) <= budget)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

}  // namespace

std::vector<ParamRow> params_report(const RunConfig& config) {
    const auto [in, out] = task_io_sizes(config.task);
    std::vector<ParamRow> rows;

    // Reference baseline grids for the dataset tasks (lstm below/above budget,
    // the stacked twins, and the nested model).
    struct Shape { Architecture arch; int n, cell; };
    std::vector<Shape> grid;
    switch (config.task) {
        case Task::PtbChar:
            grid = {{Architecture::Lstm, 1, 1000},
                    {Architecture::Lstm, 1, 1050},
                    {Architecture::Stacked, 2, 600},
                    {Architecture::Stacked, 3, 450},
                    {Architecture::Nlstm, 2, 600}};
            break;
        case Task::Text8:
            grid = {{Architecture::Lstm, 1, 2000},
                    {Architecture::Lstm, 1, 2100},
                    {Architecture::Stacked, 2, 1200},
                    {Architecture::Stacked, 3, 950},
                    {Architecture::Nlstm, 2, 1200}};
            break;
        case Task::MnistGlimpses:
            grid = {{Architecture::Lstm, 1, 100},
                    {Architecture::Lstm, 1, 130},
                    {Architecture::Stacked, 2, 75},
                    {Architecture::Stacked, 3, 60},
                    {Architecture::Nlstm, 2, 75}};
            break;
        case Task::CustomText:
            break;  // no reference grid; solved from the configured budget below
    }

    if (config.task != Task::CustomText) {
        const int conf_n = config.architecture == Architecture::Nlstm ? config.nesting_depth
                                                                      : config.layers;
        rows.push_back(make_row(config.architecture, conf_n, config.cell_size, in, out, true));
        for (const Shape& s : grid) {
            const bool same = s.arch == config.architecture && s.cell == config.cell_size &&
                              s.n == conf_n;
            if (!same) rows.push_back(make_row(s.arch, s.n, s.cell, in, out, false));
        }
        return rows;
    }

    // custom_text: the vocabulary comes from the training file, and baseline
    // cells are solved so each shape's count stays within the configured
    // model's budget (the lstm grid brackets it from below and above).
    const std::string text = read_file(config.train_path);
    const CharVocab vocab = CharVocab::build(text);
    const int vio = vocab.size();
    const int conf_n = config.architecture == Architecture::Nlstm ? config.nesting_depth
                                                                  : config.layers;
    rows.push_back(make_row(config.architecture, conf_n, config.cell_size, vio, vio, true));
    const int64_t budget = rows.front().params;
    rows.push_back(make_row(Architecture::Lstm, 1,
                            solve_cell(Architecture::Lstm, 1, vio, vio, budget), vio, vio, false));
    rows.push_back(make_row(Architecture::Lstm, 1,
                            solve_cell(Architecture::Lstm, 1, vio, vio, budget) + 1, vio, vio,
                            false));
    rows.push_back(make_row(Architecture::Stacked, 2,
                            solve_cell(Architecture::Stacked, 2, vio, vio, budget), vio, vio,
                            false));
    rows.push_back(make_row(Architecture::Stacked, 3,
                            solve_cell(Architecture::Stacked, 3, vio, vio, budget), vio, vio,
                            false));
    return rows;
}

}  // namespace nlstm
