#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bsce/config.hpp"
#include "bsce/eval.hpp"
#include "bsce/log.hpp"

namespace {

using namespace bsce;

namespace fs = std::filesystem;

// Output paths resolve under --out; inputs are taken as given.
fs::path out_path(const fs::path& p, const fs::path& out_dir) {
    const fs::path resolved = p.is_relative() ? out_dir / p : p;
    if (resolved.has_parent_path())
        fs::create_directories(resolved.parent_path());
    return resolved;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw IoError("write failure on " + path.string());
}

const std::vector<LabeledImage>& pick_split(const Dataset& d,
                                            const std::string& name) {
    if (name == "train") return d.train;
    if (name == "val") return d.val;
    return d.test;
}

Dataset load_dataset_checked(const fs::path& path) {
    if (path.empty()) throw ConfigError("io.dataset path is required");
    Dataset d = load_dataset(path);
    log_info("loaded dataset " + path.string() + " (train " +
             std::to_string(d.train.size()) + ", val " +
             std::to_string(d.val.size()) + ", test " +
             std::to_string(d.test.size()) + ", classes " +
             std::to_string(d.classes) + ")");
    return d;
}

TtaConfig tta_from_config(const RunConfig& cfg, const std::string& preset) {
    if (preset == "paper-scales") return TtaConfig::paper_scales();
    if (!cfg.tta)
        throw ConfigError("this command needs a tta section or --preset");
    return *cfg.tta;
}

void emit_report(const SweepReport& report, const RunConfig& cfg,
                 const fs::path& out_dir) {
    std::cout << report.to_text();
    if (!cfg.io.report.empty()) {
        const fs::path p = out_path(cfg.io.report, out_dir);
        write_text_file(p, report.to_csv());
        log_info("wrote report " + p.string());
    }
}

int cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
    if (!cfg.dataset) throw ConfigError("synth needs a dataset section");
    if (cfg.io.dataset.empty())
        throw ConfigError("synth needs io.dataset as output path");

    const Dataset d = synth_dataset(*cfg.dataset);
    const fs::path path = out_path(cfg.io.dataset, out_dir);
    save_dataset(d, path);
    log_info("wrote dataset " + path.string());

    const std::vector<Count> counts = class_counts(d);
    const bool has_zero =
        std::find(counts.begin(), counts.end(), Count{0}) != counts.end();
    std::vector<Real> weights;
    if (!has_zero) weights = class_weights(counts).weights();

    std::printf("class  train_count  weight\n");
    Count total = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        total += counts[k];
        if (has_zero)
            std::printf("%-5zu  %-11llu  -\n", k,
                        static_cast<unsigned long long>(counts[k]));
        else
            std::printf("%-5zu  %-11llu  %.6f\n", k,
                        static_cast<unsigned long long>(counts[k]), weights[k]);
    }
    std::printf("total  %-11llu  classes %zu\n",
                static_cast<unsigned long long>(total), counts.size());
    if (has_zero)
        std::printf("class weights undefined: a class has zero observed count\n");
    return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
    if (!cfg.train) throw ConfigError("train needs a train section");
    if (cfg.io.checkpoint.empty())
        throw ConfigError("train needs io.checkpoint as output path");

    const Dataset data = load_dataset_checked(cfg.io.dataset);
    const TrainConfig& tc = cfg.train->config;
    log_info("training " + std::string(to_string(tc.loss.kind)) +
             " for " + std::to_string(tc.epochs) + " epochs (lr " +
             std::to_string(tc.initial_lr) + ", batch " +
             std::to_string(tc.batch_size) + ", seed " +
             std::to_string(tc.seed) + ")");

    ModelParams init = init_model(cfg.train->model.input_side,
                                  cfg.train->model.hidden_dim, data.classes,
                                  tc.seed);
    const TrainState st = train(data, std::move(init), tc);

    const fs::path ckpt = out_path(cfg.io.checkpoint, out_dir);
    save_checkpoint(st, tc, ckpt);
    log_info("wrote checkpoint " + ckpt.string());

    if (!cfg.io.history.empty()) {
        std::string csv = "epoch,train_loss,val_error,lr\n";
        char buf[160];
        for (const EpochStats& e : st.history) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e.epoch,
                          e.train_loss, e.val_error, e.lr);
            csv += buf;
        }
        const fs::path hist = out_path(cfg.io.history, out_dir);
        write_text_file(hist, csv);
        log_info("wrote history " + hist.string());
    }

    if (st.history.empty()) {
        std::printf("trained %s: 0 epochs (initialization only)\n",
                    std::string(to_string(tc.loss.kind)).c_str());
    } else {
        const EpochStats& last = st.history.back();
        std::printf("trained %s: %zu epochs, final val_error %.4f, lr %.17g\n",
                    std::string(to_string(tc.loss.kind)).c_str(),
                    st.history.size(), last.val_error, last.lr);
    }
    return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& out_dir) {
    if (cfg.io.checkpoint.empty())
        throw ConfigError("eval needs io.checkpoint");
    const Dataset data = load_dataset_checked(cfg.io.dataset);
    const Checkpoint ck = load_checkpoint(cfg.io.checkpoint);

    const auto& split = pick_split(data, cfg.io.split);
    const Real err = evaluate_ensemble({ck.state.params}, split);

    SweepReport report;
    report.rows.push_back(SweepRow{std::string(to_string(ck.config.loss.kind)),
                                   cfg.io.split, err, split.size(),
                                   std::to_string(ck.config.seed)});
    emit_report(report, cfg, out_dir);
    return 0;
}

int cmd_tta(const RunConfig& cfg, const fs::path& out_dir,
            const std::string& preset) {
    if (cfg.io.checkpoint.empty()) throw ConfigError("tta needs io.checkpoint");
    const Dataset data = load_dataset_checked(cfg.io.dataset);
    const Checkpoint ck = load_checkpoint(cfg.io.checkpoint);
    const TtaConfig tta = tta_from_config(cfg, preset);

    const auto& split = pick_split(data, cfg.io.split);
    emit_report(tta_sweep(ck.state.params, split, cfg.io.split, tta), cfg,
                out_dir);
    return 0;
}

int cmd_ensemble(const RunConfig& cfg, const fs::path& out_dir,
                 const std::string& preset) {
    if (cfg.io.checkpoints.empty())
        throw ConfigError("ensemble needs io.checkpoints");
    const Dataset data = load_dataset_checked(cfg.io.dataset);

    std::vector<ModelParams> models;
    for (const fs::path& p : cfg.io.checkpoints)
        models.push_back(load_checkpoint(p).state.params);

    TtaConfig tta_cfg;
    const TtaConfig* tta = nullptr;
    if (cfg.tta || !preset.empty()) {
        tta_cfg = tta_from_config(cfg, preset);
        tta = &tta_cfg;
    }

    const auto& split = pick_split(data, cfg.io.split);
    const Real err = evaluate_ensemble(models, split, tta);

    SweepReport report;
    report.rows.push_back(
        SweepRow{"ensemble(" + std::to_string(models.size()) + ")",
                 cfg.io.split, err, split.size(), "-"});
    emit_report(report, cfg, out_dir);
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out_dir) {
    if (!cfg.train) throw ConfigError("sweep needs a train section");
    if (!cfg.sweep) throw ConfigError("sweep needs a sweep section");
    const Dataset data = load_dataset_checked(cfg.io.dataset);

    const SweepReport report =
        loss_sweep(data, cfg.train->model, cfg.train->config,
                   cfg.sweep->kinds, cfg.sweep->seeds);
    std::cout << loss_summary_table(report, cfg.sweep->kinds);
    emit_report(report, cfg, out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"balanced symmetric cross entropy toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string preset;

    auto add_common = [&](CLI::App* sub, bool with_preset) {
        sub->add_option("--config", config_path, "run config (JSON)")
            ->required();
        sub->add_option("--out", out_dir, "directory for output files");
        if (with_preset)
            sub->add_option("--preset", preset,
                            "named tta preset (paper-scales)")
                ->check(CLI::IsMember({"paper-scales"}));
    };

    add_common(app.add_subcommand("synth", "generate a synthetic dataset"),
               false);
    add_common(app.add_subcommand("train", "train a classifier"), false);
    add_common(app.add_subcommand("eval", "evaluate a checkpoint"), false);
    add_common(app.add_subcommand("tta", "multi-scale crop sweep"), true);
    add_common(app.add_subcommand("ensemble", "voted multi-model evaluation"),
               true);
    add_common(app.add_subcommand("sweep", "loss comparison sweep"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (const char* level = std::getenv("BSCE_LOG_LEVEL"))
            bsce::log_level() = bsce::parse_log_level(level);

        const RunConfig cfg = bsce::load_run_config(config_path);
        if (app.got_subcommand("synth")) return cmd_synth(cfg, out_dir);
        if (app.got_subcommand("train")) return cmd_train(cfg, out_dir);
        if (app.got_subcommand("eval")) return cmd_eval(cfg, out_dir);
        if (app.got_subcommand("tta")) return cmd_tta(cfg, out_dir, preset);
        if (app.got_subcommand("ensemble"))
            return cmd_ensemble(cfg, out_dir, preset);
        if (app.got_subcommand("sweep")) return cmd_sweep(cfg, out_dir);
        throw bsce::ConfigError("no subcommand selected");
    } catch (const bsce::ConfigError& e) {
        bsce::log_error(e.what());
        return 1;
    } catch (const bsce::IoError& e) {
        bsce::log_error(e.what());
        return 2;
    } catch (const bsce::Error& e) {
        bsce::log_error(e.what());
        return 3;
    } catch (const std::exception& e) {
        bsce::log_error(e.what());
        return 3;
    }
}
