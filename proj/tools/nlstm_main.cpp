// Command-line entry point: prep | train | eval | trace | params.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 divergence.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "nlstm/checkpoint.hpp"
#include "nlstm/config.hpp"
#include "nlstm/dataset.hpp"
#include "nlstm/trace.hpp"
#include "nlstm/trainer.hpp"

namespace fs = std::filesystem;
using namespace nlstm;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string seed;
    std::string out_dir;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig config = args.config_path.empty() ? RunConfig{} : load_config_file(args.config_path);
    for (const std::string& kv : args.overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!args.seed.empty()) apply_override(config, "seed", args.seed);
    if (!args.out_dir.empty()) apply_override(config, "out_dir", args.out_dir);
    return config;
}

struct PreparedData {
    TaskKind kind = TaskKind::LanguageModel;
    int input_size = 0;
    int output_size = 0;
    CharVocab vocab;  // text tasks only
    std::vector<SequenceBatch> train, valid, test;
};

PreparedData prepare_data(const RunConfig& config) {
    PreparedData d;
    if (config.task == Task::MnistGlimpses) {
        d.kind = TaskKind::Classification;
        d.input_size = 49;
        d.output_size = 10;
        if (config.train_images.empty() || config.train_labels.empty())
            throw ConfigError("mnist task requires train_images and train_labels");
        MnistData all = load_idx(config.train_images, config.train_labels);
        const int total = static_cast<int>(all.images.size());
        const int valid_n = std::min(config.valid_count, total);
        std::vector<GlimpseSequence> train_seqs, valid_seqs;
        for (int i = 0; i < total; ++i) {
            GlimpseSequence g = make_glimpses(all.images[static_cast<size_t>(i)],
                                              all.labels[static_cast<size_t>(i)]);
            if (i < total - valid_n)
                train_seqs.push_back(std::move(g));
            else
                valid_seqs.push_back(std::move(g));
        }
        d.train = batch_glimpses(train_seqs, config.batch_size, /*keep_remainder=*/false);
        d.valid = batch_glimpses(valid_seqs, config.batch_size, /*keep_remainder=*/true);
        if (!config.test_images.empty()) {
            MnistData test = load_idx(config.test_images, config.test_labels);
            std::vector<GlimpseSequence> test_seqs;
            for (size_t i = 0; i < test.images.size(); ++i)
                test_seqs.push_back(make_glimpses(test.images[i], test.labels[i]));
            d.test = batch_glimpses(test_seqs, config.batch_size, /*keep_remainder=*/true);
        }
        return d;
    }

    if (config.train_path.empty()) throw ConfigError("text task requires train_path");
    CorpusSplits splits = load_text_corpus(config.train_path, config.valid_path, config.test_path);
    d.kind = TaskKind::LanguageModel;
    d.vocab = splits.vocab;
    d.input_size = splits.vocab.size();
    d.output_size = splits.vocab.size();
    d.train = batch_nonoverlapping(splits.train, config.batch_size, config.seq_len);
    if (!splits.valid.empty())
        d.valid = batch_nonoverlapping(splits.valid, config.batch_size, config.seq_len);
    if (!splits.test.empty())
        d.test = batch_nonoverlapping(splits.test, config.batch_size, config.seq_len);
    return d;
}

void check_compatible(const Model& m, const PreparedData& d) {
    if (m.config.input_size != d.input_size || m.config.output_size != d.output_size)
        throw ConfigError("checkpoint expects input/output " + std::to_string(m.config.input_size) +
                          "/" + std::to_string(m.config.output_size) + " but the data provides " +
                          std::to_string(d.input_size) + "/" + std::to_string(d.output_size));
}

int cmd_prep(const RunConfig& config) {
    PreparedData d = prepare_data(config);
    std::cout << "task: " << to_string(config.task) << "\n";
    if (d.kind == TaskKind::LanguageModel) {
        std::cout << "vocab_size: " << d.vocab.size() << "\n";
    } else {
        std::cout << "input_size: " << d.input_size << "\noutput_size: " << d.output_size << "\n";
    }
    std::cout << "train_batches: " << d.train.size() << "\n"
              << "valid_batches: " << d.valid.size() << "\n"
              << "test_batches: " << d.test.size() << "\n"
              << "batch_size: " << config.batch_size << "\n"
              << "seq_len: " << (d.kind == TaskKind::Classification ? 20 : config.seq_len) << "\n";
    return 0;
}

int cmd_train(const RunConfig& config) {
    if (config.out_dir.empty()) throw ConfigError("train requires out_dir (--out DIR)");
    PreparedData d = prepare_data(config);
    fs::create_directories(config.out_dir);

    Rng rng(config.seed);
    Model model = build_model(config.model_config(d.input_size, d.output_size), rng);
    std::cout << "model: " << to_string(config.architecture) << ", "
              << group_digits(count_parameters(model)) << " parameters ("
              << display_count(count_parameters(model)) << ")\n";

    TrainResult result = run_training(model, d.train, d.valid, config.train_config(), d.kind,
                                      &std::cout);

    const fs::path out(config.out_dir);
    {
        std::ofstream hist(out / "history.tsv");
        write_history(hist, result.history);
    }
    save_checkpoint(result.best, (out / "checkpoint.bin").string());
    {
        std::ofstream frozen(out / "config.resolved.conf");
        frozen << serialize(config);
    }
    std::cout << "best epoch: " << result.best_epoch << " (valid nll "
              << (result.history.empty() ? 0.0 : result.best_valid) << ")\n"
              << "wrote " << (out / "history.tsv").string() << ", "
              << (out / "checkpoint.bin").string() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint_path, const std::string& split) {
    Model model = load_checkpoint(checkpoint_path);
    PreparedData d = prepare_data(config);
    check_compatible(model, d);
    const std::vector<SequenceBatch>* batches = nullptr;
    if (split == "train") batches = &d.train;
    else if (split == "valid") batches = &d.valid;
    else if (split == "test") batches = &d.test;
    else throw ConfigError("unknown split '" + split + "'");
    if (batches->empty()) throw DataError("split '" + split + "' has no batches");
    for (const MetricRecord& r : evaluate(model, *batches, d.kind, split, 0))
        std::cout << metric_line(r) << "\n";
    return 0;
}

int cmd_trace(const RunConfig& config, const std::string& checkpoint_path, const std::string& text_path,
              int length, const std::string& units) {
    if (config.task == Task::MnistGlimpses)
        throw ConfigError("trace applies to character tasks only");
    Model model = load_checkpoint(checkpoint_path);
    // The vocabulary is rebuilt from the training split; the checkpoint must
    // have been trained on it.
    if (config.train_path.empty()) throw ConfigError("trace requires train_path for the vocabulary");
    const CharVocab vocab = CharVocab::build(read_file(config.train_path));
    if (vocab.size() != model.config.input_size)
        throw ConfigError("checkpoint input size " + std::to_string(model.config.input_size) +
                          " does not match vocabulary size " + std::to_string(vocab.size()));

    int lo = 0, hi = 6;
    if (!units.empty()) {
        const size_t dots = units.find("..");
        if (dots == std::string::npos)
            throw ConfigError("--units expects A..B, got '" + units + "'");
        lo = std::stoi(units.substr(0, dots));
        hi = std::stoi(units.substr(dots + 2));
    }

    std::string text = read_file(text_path.empty() ? config.train_path : text_path);
    if (length > 0 && static_cast<size_t>(length) < text.size())
        text.resize(static_cast<size_t>(length));
    const std::vector<int> tokens = vocab.encode(text);

    ActivationTrace trace = trace_activations(model, tokens, vocab, lo, hi);
    if (config.out_dir.empty()) {
        write_trace_csv(std::cout, trace);
    } else {
        fs::create_directories(config.out_dir);
        const fs::path path = fs::path(config.out_dir) / "trace.csv";
        std::ofstream out(path);
        write_trace_csv(out, trace);
        std::cout << "wrote " << path.string() << " (" << trace.rows.size() << " rows)\n";
    }
    for (const LevelStat& s : trace.stats)
        std::cerr << "mean |step change| " << s.level << ": " << s.mean_abs_step_change << "\n";
    return 0;
}

int cmd_params(const RunConfig& config) {
    const std::vector<ParamRow> rows = params_report(config);
    std::cout << "task: " << to_string(config.task) << "\n";
    for (const ParamRow& r : rows) {
        std::cout << to_string(r.architecture) << "\tn=" << r.n << "\tcell=" << r.cell_size << "\t"
                  << group_digits(r.params) << " (" << r.display << ")"
                  << (r.configured ? "\t[configured]" : "") << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nested-memory recurrent sequence modeling"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string checkpoint_path, split = "valid", text_path, units;
    int length = 0;

    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "flat key-value config file");
        cmd->add_option("--set", common.overrides, "override: key=value")->take_all();
        cmd->add_option("--seed", common.seed, "seed override");
        cmd->add_option("--out", common.out_dir, "output directory override");
    };

    CLI::App* prep = app.add_subcommand("prep", "validate data and print dataset summary");
    add_common(prep);
    CLI::App* train = app.add_subcommand("train", "train a model and keep the best checkpoint");
    add_common(train);
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    add_common(eval);
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval->add_option("--split", split, "train|valid|test (default valid)");
    CLI::App* trace = app.add_subcommand("trace", "export per-unit cell activations as CSV");
    add_common(trace);
    trace->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    trace->add_option("--text", text_path, "sequence source file (default: training split)");
    trace->add_option("--length", length, "truncate the sequence to this many characters");
    trace->add_option("--units", units, "unit range A..B (default 0..6)");
    CLI::App* params = app.add_subcommand("params", "print parameter counts at matched budgets");
    add_common(params);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const RunConfig config = resolve_config(common);
        if (prep->parsed()) return cmd_prep(config);
        if (train->parsed()) return cmd_train(config);
        if (eval->parsed()) return cmd_eval(config, checkpoint_path, split);
        if (trace->parsed()) return cmd_trace(config, checkpoint_path, text_path, length, units);
        if (params->parsed()) return cmd_params(config);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
