#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "memseize/config.hpp"
#include "memseize/costmodel.hpp"
#include "memseize/dataset.hpp"
#include "memseize/eval.hpp"
#include "memseize/network.hpp"
#include "memseize/synth.hpp"
#include "memseize/training.hpp"
#include "memseize/util.hpp"

namespace fs = std::filesystem;
using namespace memseize;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<fs::path> edf_files_in(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".edf") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

fs::path summary_file_in(const fs::path& dir) {
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.find("summary") != std::string::npos && entry.path().extension() == ".txt")
            return entry.path();
    }
    throw ConfigError("missing seizure summary file (*summary*.txt) in " + dir.string());
}

int cmd_preprocess(const RunConfig& cfg) {
    cfg.validate_paths(true);
    const auto files = edf_files_in(cfg.data_dir);
    if (files.empty()) throw ConfigError("no .edf recordings in " + cfg.data_dir.string());
    const std::string summary = read_file(summary_file_in(cfg.data_dir));
    const BuildStats stats =
        build_dataset(files, summary, cfg.clinical, cfg.output_dir / "dataset");
    if (stats.no_seizures)
        std::cerr << "warning: no leading seizures found; dataset is interictal-only\n";
    std::cout << "windows: " << stats.n_preictal << " preictal (" << stats.n_synthetic
              << " synthetic), " << stats.n_interictal << " interictal\n";
    std::cout << "overlap step S = " << format_double(stats.step_s) << " s\n";
    return 0;
}

// The dataset lives where `preprocess` put it (output_dir/dataset) or, for
// pre-built datasets, directly in data_dir.
fs::path resolve_dataset_dir(const RunConfig& cfg) {
    const fs::path built = cfg.output_dir / "dataset";
    if (fs::exists(built / "windows.bin")) return built;
    if (fs::exists(cfg.data_dir / "windows.bin")) return cfg.data_dir;
    throw ConfigError("dataset not found at " + built.string() + " or " +
                      cfg.data_dir.string() + "; run preprocess first");
}

int cmd_train(const RunConfig& cfg) {
    cfg.validate_paths(false);
    const Dataset ds = load_dataset(resolve_dataset_dir(cfg), cfg.channels, cfg.frames());
    const NetworkSpec spec = NetworkSpec::make(cfg.channels, cfg.frames());
    const FoldPlan plan =
        stratified_kfold(ds.labels(), ds.synthetic_flags(), cfg.training.folds, cfg.seed);

    std::ostringstream log_csv;
    log_csv << "epoch,fold,loss,train_accuracy\n";
    for (int f = 0; f < plan.k; ++f) {
        const TrainResult result = train_fold(spec, ds, plan, f, cfg.training, cfg.seed);
        save_weights(cfg.output_dir / "weights" / ("fold_" + std::to_string(f)), spec,
                     result.weights);
        for (const auto& row : result.log)
            log_csv << row.epoch << ',' << row.fold << ',' << format_double(row.loss) << ','
                    << format_double(row.train_accuracy) << '\n';
        std::cout << "fold " << f << ": final loss "
                  << format_double(result.log.back().loss) << ", train accuracy "
                  << format_double(result.log.back().train_accuracy) << '\n';
    }
    write_file_atomic(cfg.output_dir / "training_log.csv", log_csv.str());
    return 0;
}

std::vector<LayerWeights> load_fold_weights(const RunConfig& cfg, const NetworkSpec& spec) {
    std::vector<LayerWeights> weights;
    for (int f = 0; f < cfg.training.folds; ++f) {
        const fs::path dir = cfg.output_dir / "weights" / ("fold_" + std::to_string(f));
        if (!fs::exists(dir / "weights.bin"))
            throw ConfigError("missing trained weights at " + dir.string() + "; run train first");
        weights.push_back(load_weights(dir, spec));
    }
    return weights;
}

int cmd_simulate(const RunConfig& cfg, const std::string& dump_conductances) {
    cfg.validate_paths(false);
    const Dataset ds = load_dataset(resolve_dataset_dir(cfg), cfg.channels, cfg.frames());
    const NetworkSpec spec = NetworkSpec::make(cfg.channels, cfg.frames());
    const FoldPlan plan =
        stratified_kfold(ds.labels(), ds.synthetic_flags(), cfg.training.folds, cfg.seed);
    const std::vector<LayerWeights> weights = load_fold_weights(cfg, spec);

    const std::vector<SweepRow> rows =
        sweep(spec, weights, ds, plan, cfg.device, cfg.sweep, cfg.seed);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_file_atomic(cfg.output_dir / "sweep.csv", csv.str());
    std::cout << rows.size() << " rows -> " << (cfg.output_dir / "sweep.csv").string() << '\n';

    if (!dump_conductances.empty()) {
        DeviceParameters dev = cfg.device;
        dev.sigma = cfg.sweep.sigmas.front();
        dev.n_states = cfg.sweep.states.front();
        const MappedNetwork net = map_network(spec, weights.front(), dev, cfg.sweep.tile,
                                              cfg.sweep.scheme, cfg.seed);
        std::ostringstream cells;
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            cells << "# layer " << l << '\n';
            dump_cells(net.layers[l], cells);
        }
        write_file_atomic(fs::path(dump_conductances), cells.str());
    }
    return 0;
}

int cmd_cost(const RunConfig& cfg, const std::string& mode, bool strict_double) {
    const NetworkSpec spec = NetworkSpec::make(cfg.channels, cfg.frames());
    std::vector<CostReport> reports;
    if (mode == "tdm" || mode == "both")
        reports.push_back(estimate(spec, cfg.hardware, ReadoutMode::TDM, strict_double));
    if (mode == "parallel" || mode == "both")
        reports.push_back(estimate(spec, cfg.hardware, ReadoutMode::Parallelized, strict_double));
    if (reports.empty()) throw ConfigError("cost: unknown mode '" + mode + "'");

    std::ostringstream csv;
    write_cost_csv(csv, reports);
    write_file_atomic(cfg.output_dir / "cost_report.csv", csv.str());
    render_cost_table(std::cout, reports);
    return 0;
}

int cmd_synth_data(const fs::path& out, const std::string& kind, std::uint64_t seed) {
    if (kind == "toy" || kind == "all") make_toy_dataset(out / "toy", 200, seed);
    if (kind == "edf" || kind == "all") make_edf_fixtures(out / "pipeline", seed);
    if (kind != "toy" && kind != "edf" && kind != "all")
        throw ConfigError("synth-data: unknown kind '" + kind + "'");
    std::cout << "fixtures written under " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memseize: crossbar-mapped CNN inference simulator for EEG seizure prediction"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode = "both";
    std::string kind = "all";
    std::string dump_conductances;
    bool strict_double = false;
    std::string out_dir = ".";
    std::uint64_t synth_seed = 7;

    // Flag overrides applied on top of the config file.
    std::vector<double> sigma_override;
    std::vector<std::string> states_override;
    std::string scheme_override;

    auto* prep = app.add_subcommand("preprocess", "build spectrogram windows from recordings");
    prep->add_option("--config", config_path, "run configuration file")->required();

    auto* train = app.add_subcommand("train", "train the network with k-fold splits");
    train->add_option("--config", config_path, "run configuration file")->required();

    auto* sim = app.add_subcommand("simulate", "crossbar inference over a nonideality grid");
    sim->add_option("--config", config_path, "run configuration file")->required();
    sim->add_option("--sigma", sigma_override, "device variability values (overrides config)")
        ->delimiter(',');
    sim->add_option("--states", states_override,
                    "conductance state counts or 'continuous' (overrides config)")
        ->delimiter(',');
    sim->add_option("--scheme", scheme_override, "weight scheme: double | single");
    sim->add_option("--dump-conductances", dump_conductances,
                    "write per-cell target/programmed conductances to this CSV");

    auto* cost = app.add_subcommand("cost", "analytical power/area/latency/energy estimate");
    cost->add_option("--config", config_path, "run configuration file")->required();
    cost->add_option("--mode", mode, "tdm | parallel | both")->default_str("both");
    cost->add_flag("--strict-double-column", strict_double,
                   "double the tile count for two-crossbar weight storage");

    auto* synth = app.add_subcommand("synth-data", "generate bundled synthetic fixtures");
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--kind", kind, "toy | edf | all")->default_str("all");
    synth->add_option("--seed", synth_seed, "fixture seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(synth))
            return cmd_synth_data(out_dir, kind, synth_seed);

        RunConfig cfg = RunConfig::load(config_path);
        if (!sigma_override.empty()) cfg.sweep.sigmas = sigma_override;
        if (!states_override.empty()) {
            cfg.sweep.states.clear();
            for (const auto& s : states_override)
                cfg.sweep.states.push_back(s == "continuous" ? kContinuousStates : std::stoi(s));
        }
        if (!scheme_override.empty()) {
            if (scheme_override == "double")
                cfg.sweep.scheme = WeightScheme::DoubleColumn;
            else if (scheme_override == "single")
                cfg.sweep.scheme = WeightScheme::SingleColumn;
            else
                throw ConfigError("simulate: scheme must be 'double' or 'single'");
        }
        for (const double s : cfg.sweep.sigmas)
            if (s < 0.0) throw ConfigError("sigma must be non-negative");

        if (app.got_subcommand(prep)) return cmd_preprocess(cfg);
        if (app.got_subcommand(train)) return cmd_train(cfg);
        if (app.got_subcommand(sim)) return cmd_simulate(cfg, dump_conductances);
        if (app.got_subcommand(cost)) return cmd_cost(cfg, mode, strict_double);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
