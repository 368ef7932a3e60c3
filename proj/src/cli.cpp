#include "triad/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "triad/analysis.hpp"
#include "triad/checkpoint.hpp"
#include "triad/num_format.hpp"
#include "triad/run_config.hpp"

namespace triad::cli {

namespace {

namespace fs = std::filesystem;

/// Precedence for output locations: explicit flag, then the config document,
/// then $TRIAD_OUT_ROOT/<leaf>, then ./<leaf>.
std::string resolve_out_dir(const std::string& flag, const std::string& from_config,
                            const std::string& leaf) {
    if (!flag.empty()) return flag;
    if (!from_config.empty()) return from_config;
    if (const char* root = std::getenv("TRIAD_OUT_ROOT"); root != nullptr && *root != '\0') {
        return (fs::path(root) / leaf).string();
    }
    return (fs::path(".") / leaf).string();
}

void apply_toggle_overrides(TrainConfig& cfg, const std::vector<std::string>& toggles) {
    for (const std::string& t : toggles) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("--toggle expects name=on|off, got '" + t + "'");
        }
        const std::string name = t.substr(0, eq);
        const std::string value = t.substr(eq + 1);
        bool on = false;
        if (value == "on" || value == "true" || value == "1") {
            on = true;
        } else if (value == "off" || value == "false" || value == "0") {
            on = false;
        } else {
            throw InvalidConfig("--toggle value must be on/off, got '" + value + "'");
        }
        if (name == "text_modality") {
            cfg.toggles.text_modality = on;
        } else if (name == "adapter") {
            cfg.toggles.adapter = on;
        } else if (name == "mcdb") {
            cfg.toggles.mcdb = on;
        } else if (name == "spr") {
            cfg.toggles.spr = on;
        } else {
            throw InvalidConfig("unknown toggle '" + name +
                                "' (expected text_modality/adapter/mcdb/spr)");
        }
    }
}

std::vector<double> parse_double_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(cell, &pos));
            if (pos != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw InvalidConfig(std::string(flag) + ": bad number '" + cell + "'");
        }
    }
    if (out.empty()) throw InvalidConfig(std::string(flag) + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
    std::vector<int> out;
    for (double v : parse_double_list(s, flag)) {
        out.push_back(static_cast<int>(v));
    }
    return out;
}

MultimodalDataset load_dataset_checked(const std::string& dir) {
    if (!fs::exists(fs::path(dir) / "manifest.json")) {
        throw InvalidConfig("dataset not found at '" + dir + "' (no manifest.json)");
    }
    return load_dataset(dir);
}

void write_ablation_csv(const AblationTable& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write ablation table: " + path);
    os << "label,text,adapter,mcdb,spr,top1,top5\n";
    for (const AblationRow& r : table.rows) {
        os << r.label << ',' << (r.toggles.text_modality ? 1 : 0) << ','
           << (r.toggles.adapter ? 1 : 0) << ',' << (r.toggles.mcdb ? 1 : 0) << ','
           << (r.toggles.spr ? 1 : 0) << ',' << fmt_double(r.top1) << ',' << fmt_double(r.top5)
           << '\n';
    }
    if (!os) throw IoError("ablation table write failed: " + path);
}

int cmd_gen_data(const std::string& config_path, const std::string& out_flag) {
    const RunConfig cfg = load_run_config(config_path);
    const std::string dir = resolve_out_dir(out_flag, cfg.dataset_dir, "dataset");
    const MultimodalDataset ds = generate_synthetic(cfg.data);
    save_dataset(ds, dir);
    std::cout << "dataset written to " << dir << " (seed " << cfg.data.seed << ", "
              << ds.train.count() << " train / " << ds.val.count() << " val / "
              << ds.test.count() << " test trials)\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& dataset_flag,
              const std::string& out_flag, const std::vector<std::string>& toggles,
              bool has_seed, std::uint64_t seed, int epochs_override) {
    RunConfig cfg = load_run_config(config_path);
    apply_toggle_overrides(cfg.train, toggles);
    if (has_seed) cfg.train.seed = seed;
    if (epochs_override >= 0) cfg.train.epochs = epochs_override;

    const std::string dataset_dir =
        dataset_flag.empty() ? cfg.dataset_dir : dataset_flag;
    if (dataset_dir.empty()) {
        throw InvalidConfig("no dataset directory (set dataset_dir in the config or --dataset)");
    }
    const MultimodalDataset ds = load_dataset_checked(dataset_dir);

    const std::string out = resolve_out_dir(out_flag, cfg.output_dir, "run");
    TrainOutcome outcome = train(ds, cfg.train);

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create run directory: " + out);
    write_metrics_csv(outcome.report, (fs::path(out) / "metrics.csv").string());
    save_checkpoint(outcome.model, (fs::path(out) / "checkpoint.json").string());
    write_summary_json(cfg.train, outcome.report, "checkpoint.json",
                       (fs::path(out) / "summary.json").string());
    std::cout << "run written to " << out << " (best epoch " << outcome.report.best_epoch
              << ", best val loss " << fmt_double(outcome.report.best_val_loss) << ")\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_dir,
             const std::string& k_list, double w_text, const std::string& out_file,
             const std::string& ranking_csv) {
    Model model = load_checkpoint(checkpoint_path);
    const MultimodalDataset ds = load_dataset_checked(dataset_dir);
    if (ds.feature_dim != model.config().dim) {
        throw DimensionMismatch("dataset feature_dim " + std::to_string(ds.feature_dim) +
                                " != checkpoint dim " + std::to_string(model.config().dim));
    }
    if (ds.eeg_channels != model.config().eeg_channels ||
        ds.eeg_timepoints != model.config().eeg_timepoints) {
        throw DimensionMismatch(
            "dataset EEG shape " + std::to_string(ds.eeg_channels) + "x" +
            std::to_string(ds.eeg_timepoints) + " != checkpoint " +
            std::to_string(model.config().eeg_channels) + "x" +
            std::to_string(model.config().eeg_timepoints));
    }

    EvalOptions opts;
    opts.w_text = w_text;
    const double effective_w = model.config().use_text && ds.has_text ? opts.w_text : 0.0;
    const TemplateBank bank = build_templates(ds.test, ds.has_text, model, effective_w);
    if (!k_list.empty()) {
        opts.ks = parse_int_list(k_list, "--k"); // explicit ks are checked strictly
    } else {
        opts.ks = {1};
        if (bank.num_classes() > 1) {
            opts.ks.push_back(std::min(5, bank.num_classes()));
        }
    }
    const Matrix emb = model.embed_eeg(ds.test.eeg_flat);
    const EvalReport report = topk_accuracy(emb, ds.test.labels, bank, opts.ks);

    if (out_file.empty()) {
        nlohmann::json doc = {{"top1", report.top1}, {"top5", report.top5}};
        for (const auto& [k, acc] : report.topk) {
            doc["topk"].push_back({{"k", k}, {"accuracy", acc}});
        }
        std::cout << doc.dump(2) << "\n";
    } else {
        write_eval_report_json(report, bank, out_file);
        std::cout << "eval report written to " << out_file << "\n";
    }
    if (!ranking_csv.empty()) {
        write_ranking_csv(report, ds.test.labels, ranking_csv);
        std::cout << "per-sample ranking written to " << ranking_csv << "\n";
    }
    return 0;
}

int cmd_analyze(const std::vector<std::string>& metrics_paths,
                const std::vector<std::string>& compare_paths, const std::string& out_flag) {
    // Several metrics files aggregate into a seed-averaged summary.
    auto summarize_group = [](const std::vector<std::string>& paths) {
        std::vector<TrajectorySummary> runs;
        runs.reserve(paths.size());
        for (const std::string& p : paths) {
            runs.push_back(summarize_csv(p));
        }
        return runs.size() == 1 ? runs.front() : aggregate_summaries(runs);
    };

    const TrajectorySummary summary = summarize_group(metrics_paths);
    const std::string out = resolve_out_dir(out_flag, "", "analysis");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create analysis directory: " + out);
    write_summary_json(summary, (fs::path(out) / "summary.json").string());
    std::cout << "trajectory summary (" << metrics_paths.size() << " run"
              << (metrics_paths.size() == 1 ? "" : "s") << ") written to " << out
              << "/summary.json\n";
    if (!compare_paths.empty()) {
        const TrajectorySummary other = summarize_group(compare_paths);
        write_summary_json(other, (fs::path(out) / "summary_b.json").string());
        const RunComparison cmp = compare_runs(summary, other);
        write_comparison_json(cmp, (fs::path(out) / "comparison.json").string());
        std::cout << "comparison written to " << out << "/comparison.json\n";
    }
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& dataset_flag,
               const std::string& out_flag, const std::string& gamma_list,
               const std::string& ratio_list) {
    RunConfig cfg = load_run_config(config_path);
    const std::string dataset_dir = dataset_flag.empty() ? cfg.dataset_dir : dataset_flag;
    if (dataset_dir.empty()) {
        throw InvalidConfig("no dataset directory (set dataset_dir in the config or --dataset)");
    }
    const MultimodalDataset ds = load_dataset_checked(dataset_dir);
    const std::string out = resolve_out_dir(out_flag, cfg.output_dir, "ablation");

    // One (label-suffix, train-config) job per swept value; a plain run when
    // nothing is swept.
    std::vector<std::pair<std::string, TrainConfig>> jobs;
    if (gamma_list.empty() && ratio_list.empty()) {
        jobs.emplace_back("", cfg.train);
    }
    if (!gamma_list.empty()) {
        std::stringstream ss(gamma_list);
        std::string token;
        while (std::getline(ss, token, ',')) {
            TrainConfig tc = cfg.train;
            tc.balance.gamma = parse_double_list(token, "--gamma").front();
            jobs.emplace_back("_gamma_" + token, tc);
        }
    }
    if (!ratio_list.empty()) {
        // Bottleneck compression pairs as text/image, e.g. 16/8.
        std::stringstream ss(ratio_list);
        std::string token;
        while (std::getline(ss, token, ',')) {
            const auto slash = token.find('/');
            if (slash == std::string::npos) {
                throw InvalidConfig("--ratios expects text/image pairs like 16/8, got '" +
                                    token + "'");
            }
            TrainConfig tc = cfg.train;
            tc.model.r_text = parse_int_list(token.substr(0, slash), "--ratios").front();
            tc.model.r_image = parse_int_list(token.substr(slash + 1), "--ratios").front();
            jobs.emplace_back("_ratio_" + token.substr(0, slash) + "_" + token.substr(slash + 1),
                              tc);
        }
    }

    // The ablation rows turn every module on regardless of the config's own
    // toggles, so the adapter dims must work for every job up front.
    for (const auto& [suffix, tc] : jobs) {
        if (tc.model.r_image < 1 || tc.model.r_text < 1 ||
            ds.feature_dim % tc.model.r_image != 0 || ds.feature_dim % tc.model.r_text != 0) {
            throw InvalidConfig("ablate" + suffix +
                                ": feature_dim must be divisible by r_image and r_text");
        }
    }

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create ablation directory: " + out);

    for (const auto& [suffix, tc] : jobs) {
        const AblationTable table = run_ablation(ds, tc, cfg.eval);
        const std::string path = (fs::path(out) / ("ablation" + suffix + ".csv")).string();
        write_ablation_csv(table, path);
        std::cout << "ablation table written to " << path << "\n";
    }
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"tri-modal EEG/image/text alignment experiments"};
    app.require_subcommand(1);

    std::string config_path, dataset_dir, out_dir, checkpoint_path, k_list, gamma_list, out_file;
    std::string ranking_csv, ratio_list;
    std::vector<std::string> metrics_paths, compare_paths;
    std::vector<std::string> toggles;
    std::uint64_t seed = 0;
    int epochs_override = -1;
    double w_text = 0.5;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    gen->add_option("--config", config_path, "run config JSON")->required();
    gen->add_option("--out", out_dir, "dataset directory (overrides config dataset_dir)");

    CLI::App* tr = app.add_subcommand("train", "train a model and write run artifacts");
    tr->add_option("--config", config_path, "run config JSON")->required();
    tr->add_option("--dataset", dataset_dir, "dataset directory (overrides config)");
    tr->add_option("--out", out_dir, "run directory (overrides config output_dir)");
    tr->add_option("--toggle", toggles, "override a module toggle, e.g. mcdb=off (repeatable)");
    CLI::Option* seed_opt = tr->add_option("--seed", seed, "override the training seed");
    tr->add_option("--epochs", epochs_override, "override the epoch count");

    CLI::App* ev = app.add_subcommand("eval", "zero-shot evaluation of a checkpoint");
    ev->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    ev->add_option("--dataset", dataset_dir, "dataset directory")->required();
    ev->add_option("--k", k_list, "comma-separated k values (default 1,5)");
    ev->add_option("--w-text", w_text, "text weight in the class templates (default 0.5)");
    ev->add_option("--out", out_file, "write the report JSON here instead of stdout");
    ev->add_option("--ranking-csv", ranking_csv, "also write a per-sample ranking CSV");

    CLI::App* an = app.add_subcommand("analyze", "gradient-balance diagnostics from a metrics CSV");
    an->add_option("--metrics", metrics_paths,
                   "metrics.csv of a run; several files aggregate into a seed average")
        ->required();
    an->add_option("--compare", compare_paths, "metrics.csv (or several) to diff against");
    an->add_option("--out", out_dir, "output directory");

    CLI::App* ab = app.add_subcommand("ablate", "run the five-row module ablation");
    ab->add_option("--config", config_path, "run config JSON")->required();
    ab->add_option("--dataset", dataset_dir, "dataset directory (overrides config)");
    ab->add_option("--out", out_dir, "output directory");
    ab->add_option("--gamma", gamma_list, "comma-separated gamma sweep, one table per value");
    ab->add_option("--ratios", ratio_list,
                   "comma-separated text/image compression pairs (e.g. 16/8,8/8), one table per pair");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_data(config_path, out_dir);
        }
        if (tr->parsed()) {
            return cmd_train(config_path, dataset_dir, out_dir, toggles,
                             seed_opt->count() > 0, seed, epochs_override);
        }
        if (ev->parsed()) {
            return cmd_eval(checkpoint_path, dataset_dir, k_list, w_text, out_file, ranking_csv);
        }
        if (an->parsed()) {
            return cmd_analyze(metrics_paths, compare_paths, out_dir);
        }
        if (ab->parsed()) {
            return cmd_ablate(config_path, dataset_dir, out_dir, gamma_list, ratio_list);
        }
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DimensionMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const MissingModality& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const KExceedsClasses& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const MalformedCsv& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const LengthMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("triad");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) {
        argv.push_back(s.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace triad::cli
