// Command-line front end: train, eval, sweep, synth, selfcheck.
//
// Exit codes: 0 success, 1 configuration error, 2 data error,
// 3 numerical abort during training.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ontotkge/checkpoint.hpp"
#include "ontotkge/config.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/eval.hpp"
#include "ontotkge/selfcheck.hpp"
#include "ontotkge/synthgen.hpp"
#include "ontotkge/trainer.hpp"

namespace fs = std::filesystem;
using namespace onto;

namespace {

std::ostream* progress_stream() {
    const char* v = std::getenv("ONTOTKGE_VERBOSE");
    if (v && std::string(v) == "0") return nullptr;
    return &std::cerr;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

// Shared train/eval/sweep option block. Every option funnels through
// config_set so the CLI, config files and checkpoints agree on key names;
// CLI flags override config-file values.
struct ConfigCli {
    std::string config_file;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    std::vector<std::string> values;

    void attach(CLI::App* cmd, bool with_data) {
        cmd->add_option("--config", config_file, "flat key = value config file");
        values.resize(32);
        size_t i = 0;
        auto opt = [&](const std::string& flag, const std::string& key, const char* desc) {
            opts.emplace_back(key, cmd->add_option(flag, values[i++], desc));
        };
        if (with_data) opt("--data", "data", "dataset directory");
        opt("--out", "out", "output directory");
        opt("--epochs", "epochs", "training epochs");
        opt("--lr", "lr", "learning rate");
        opt("--grad-clip", "grad_clip", "global gradient-norm clip");
        opt("--seed", "seed", "random seed");
        opt("--dim", "dim", "embedding dimension");
        opt("--layers", "layers", "graph-convolution layers per stack");
        opt("--hops", "hops", "local subgraph radius");
        opt("--cone-k", "cone_k", "entailment cone constant");
        opt("--tau", "tau", "contrastive temperature");
        opt("--alpha1", "alpha1", "entailment loss weight");
        opt("--alpha2", "alpha2", "contrastive loss weight");
        opt("--history", "history", "temporal window length");
        opt("--op", "op", "composition op: sub|mult|corr");
        opt("--fusion", "fusion", "fusion mode: gate|sum");
        opt("--channels", "channels", "decoder convolution channels");
        opt("--kernel-width", "kernel_width", "decoder kernel width (odd)");
        opt("--train-fraction", "train_fraction", "fraction of training facts kept");

        flags_.push_back(cmd->add_flag("--no-local-encoder", "drop the local encoder"));
        flag_keys_.push_back("no_local_encoder");
        flags_.push_back(cmd->add_flag("--random-init", "plain learnable entity table"));
        flag_keys_.push_back("random_init");
        flags_.push_back(cmd->add_flag("--no-global-init", "drop the ontology initialization"));
        flag_keys_.push_back("no_global_init");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_file.empty()) cfg = load_config_file(config_file);
        for (const auto& [key, opt] : opts) {
            if (opt->count() > 0) config_set(cfg, key, opt->results().front());
        }
        for (size_t i = 0; i < flags_.size(); ++i) {
            if (flags_[i]->count() > 0) config_set(cfg, flag_keys_[i], "1");
        }
        return cfg;
    }

private:
    std::vector<CLI::Option*> flags_;
    std::vector<std::string> flag_keys_;
};

int run_train(const RunConfig& cfg) {
    if (cfg.data.empty()) throw ConfigError("train: --data is required");
    (void)cfg.model_config();  // reject bad configurations before touching data
    DatasetBundle raw = load_dataset(cfg.data);
    DatasetBundle subset = subset_train_fraction(raw, cfg.train_fraction);
    DatasetBundle augmented = augment_inverse(subset);
    Model model(cfg.model_config(), augmented);

    TrainOutput out = train_model(model, augmented, cfg, progress_stream());

    fs::path out_dir(cfg.out);
    fs::create_directories(out_dir);
    write_text(out_dir / "config.resolved", resolved_config(cfg));
    write_text(out_dir / "train_log.csv", training_log_csv(out.log));
    save_checkpoint(out_dir / "checkpoint.bin", model, cfg);

    std::cout << "best_epoch=" << out.best_epoch << " best_val_mrr=" << out.best_val_mrr
              << "\ncheckpoint: " << (out_dir / "checkpoint.bin").string() << "\n";
    return 0;
}

int run_eval(const std::string& checkpoint, const std::string& data, const std::string& split_s,
             const std::string& out_file, bool buckets, const std::string& dump_ranks) {
    DatasetBundle raw = load_dataset(data);
    DatasetBundle augmented = augment_inverse(raw);
    LoadedCheckpoint loaded = load_checkpoint(checkpoint, augmented);

    Split split;
    if (split_s == "valid") split = Split::valid;
    else if (split_s == "test") split = Split::test;
    else if (split_s == "train") split = Split::train;
    else throw ConfigError("eval: unknown split '" + split_s + "'");

    RankReport report = evaluate(*loaded.model, augmented, split);
    std::cout << "split=" << split_name(split) << " queries=" << report.num_queries
              << " mrr=" << report.mrr << " h@1=" << report.hits1 << " h@3=" << report.hits3
              << " h@10=" << report.hits10 << "\n";
    if (buckets) {
        std::cout << "bucket\tcount\tmrr\th@1\th@10\n";
        for (size_t b = 0; b < report.buckets.size(); ++b) {
            const BucketStats& bs = report.buckets[b];
            std::cout << kDegreeBucketLabels[b] << '\t' << bs.count << '\t' << bs.mrr << '\t'
                      << bs.h1 << '\t' << bs.h10 << "\n";
        }
    }
    if (!out_file.empty()) write_text(out_file, report_json(report, true));
    if (!dump_ranks.empty()) write_rank_dump(dump_ranks, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ontology-enhanced temporal knowledge graph extrapolation"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    ConfigCli train_cfg;
    train_cfg.attach(train_cmd, true);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string eval_ckpt, eval_data, eval_split = "test", eval_out, eval_dump;
    bool eval_buckets = false;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
    eval_cmd->add_option("--split", eval_split, "train|valid|test (default test)");
    eval_cmd->add_option("--out", eval_out, "write the JSON report here");
    eval_cmd->add_flag("--buckets", eval_buckets, "print the per-degree-bucket table");
    eval_cmd->add_option("--dump-ranks", eval_dump, "write per-query ranks as TSV");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "train/eval across one axis");
    ConfigCli sweep_cfg;
    std::string sweep_axis, sweep_values, sweep_csv_out;
    sweep_cmd->add_option("--axis", sweep_axis, "train_fraction|N|J|K")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values (N accepts 'max')")
        ->required();
    sweep_cmd->add_option("--csv", sweep_csv_out, "output CSV path");
    sweep_cfg.attach(sweep_cmd, true);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_spec_file, synth_out;
    synth_cmd->add_option("--spec", synth_spec_file, "JSON generator spec (defaults if omitted)");
    synth_cmd->add_option("--out", synth_out, "output dataset directory")->required();

    // selfcheck
    auto* check_cmd = app.add_subcommand("selfcheck", "run the gradient and invariant suites");
    int check_instances = 20;
    check_cmd->add_option("--instances", check_instances, "instances per gradient check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            return run_train(train_cfg.resolve());
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_ckpt, eval_data, eval_split, eval_out, eval_buckets, eval_dump);
        }
        if (sweep_cmd->parsed()) {
            RunConfig cfg = sweep_cfg.resolve();
            if (cfg.data.empty()) throw ConfigError("sweep: --data is required");
            std::vector<std::string> values;
            std::stringstream ss(sweep_values);
            std::string item;
            while (std::getline(ss, item, ',')) values.push_back(item);
            DatasetBundle raw = load_dataset(cfg.data);
            auto rows = run_sweep(cfg, raw, sweep_axis, values, progress_stream());
            std::string csv = sweep_csv(rows);
            std::cout << csv;
            if (!sweep_csv_out.empty()) write_text(sweep_csv_out, csv);
            return 0;
        }
        if (synth_cmd->parsed()) {
            SynthSpec spec;
            if (!synth_spec_file.empty()) {
                std::ifstream in(synth_spec_file);
                if (!in) throw ConfigError("cannot open synth spec " + synth_spec_file);
                std::ostringstream buf;
                buf << in.rdbuf();
                spec = synth_spec_from_json(buf.str());
            }
            generate_files(spec, synth_out);
            write_text(fs::path(synth_out) / "spec.resolved.json", synth_spec_to_json(spec));
            std::cout << "dataset written to " << synth_out << "\n";
            return 0;
        }
        if (check_cmd->parsed()) {
            return selfcheck::run_selfcheck(std::cout, check_instances) ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
