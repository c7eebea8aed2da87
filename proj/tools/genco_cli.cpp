// Command-line front end: dataset synthesis, training, generation,
// evaluation, the gamma ablation sweep, and human-readable grid dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "genco/runner.hpp"

namespace {

bool log_info() {
    const char* v = std::getenv("GENCO_LOG");
    if (!v) return true; // default verbosity: info
    std::string s(v);
    return s != "quiet";
}

void info(const std::string& msg) {
    if (log_info()) std::cerr << "[genco] " << msg << '\n';
}

genco::RunConfig config_or_default(const std::string& path) {
    if (path.empty()) return genco::RunConfig{};
    return genco::load_config(path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"genco: constrained generative training through exact combinatorial solvers"};
    app.require_subcommand(1);

    std::string config_path, out_path, samples_path, reference_path;
    int n = 0;
    int k = 5;
    std::uint64_t seed = 0;
    bool seed_set = false, regime_set = false;
    std::string regime;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Random seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    auto* synth_levels = app.add_subcommand("synth-levels", "Write a synthetic level dataset");
    synth_levels->add_option("--config", config_path, "Run config (grid dims)");
    synth_levels->add_option("--out", out_path, "Output dataset path")->required();
    synth_levels->add_option("--n", n, "Number of levels")->default_val(50);
    add_seed(synth_levels);

    auto* synth_terrain = app.add_subcommand("synth-terrain", "Write a synthetic terrain dataset");
    synth_terrain->add_option("--config", config_path, "Run config (grid dims)");
    synth_terrain->add_option("--out", out_path, "Output dataset path")->required();
    synth_terrain->add_option("--n", n, "Number of maps")->default_val(200);
    add_seed(synth_terrain);

    auto* train = app.add_subcommand("train", "Train the configured regime");
    train->add_option("--config", config_path, "Run config")->required();
    train->add_option("--out", out_path, "Run directory")->required();
    train->add_option("--regime", regime, "Override regime")->each([&](const std::string&) {
        regime_set = true;
    });
    add_seed(train);

    auto* generate = app.add_subcommand("generate", "Sample from a trained checkpoint");
    generate->add_option("--config", config_path, "Resolved run config (config.json)")
        ->required();
    generate->add_option("--out", out_path, "Output samples path")->required();
    generate->add_option("--n", n, "Number of samples")->default_val(1000);
    add_seed(generate);

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate samples against a reference");
    evaluate->add_option("samples", samples_path, "Samples file")->required();
    evaluate->add_option("reference", reference_path, "Reference dataset")->required();
    evaluate->add_option("--k", k, "Nearest neighbors for density/coverage")->default_val(5);
    evaluate->add_option("--out", out_path, "Report path (default stdout)");

    auto* sweep = app.add_subcommand("sweep-gamma", "Penalized-regime gamma ablation");
    sweep->add_option("--config", config_path, "Run config")->required();
    sweep->add_option("--out", out_path, "Sweep directory")->required();
    add_seed(sweep);

    auto* dump = app.add_subcommand("dump", "Character-art dump of a level samples file");
    dump->add_option("samples", samples_path, "Level samples file")->required();
    dump->add_option("--out", out_path, "Output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_levels->parsed()) {
            genco::RunConfig cfg = config_or_default(config_path);
            auto spec = cfg.level_spec();
            auto ds = genco::synth_levels(spec, n, seed_set ? seed : cfg.seed);
            genco::save_levels(out_path, ds);
            info("wrote " + std::to_string(ds.records.size()) + " levels to " + out_path);
        } else if (synth_terrain->parsed()) {
            genco::RunConfig cfg = config_or_default(config_path);
            auto ds = genco::synth_terrain(cfg.terrain_height, cfg.terrain_width, n,
                                           seed_set ? seed : cfg.seed);
            genco::save_terrain(out_path, ds);
            info("wrote " + std::to_string(ds.records.size()) + " maps to " + out_path);
        } else if (train->parsed()) {
            genco::RunConfig cfg = genco::load_config(config_path);
            if (seed_set) cfg.seed = seed;
            if (regime_set) cfg.regime = regime;
            genco::MetricReport rep = genco::run(cfg, out_path);
            info("run finished; report:");
            std::cout << genco::format_report(rep);
        } else if (generate->parsed()) {
            genco::RunConfig cfg = genco::load_config(config_path);
            genco::generate_to_file(cfg, n, seed_set ? seed : cfg.seed, out_path);
            info("wrote samples to " + out_path);
        } else if (evaluate->parsed()) {
            genco::MetricReport rep = genco::evaluate_files(samples_path, reference_path, k);
            std::string text = genco::format_report(rep);
            if (out_path.empty())
                std::cout << text;
            else {
                std::ofstream f(out_path, std::ios::binary);
                f << text;
            }
        } else if (sweep->parsed()) {
            genco::RunConfig cfg = genco::load_config(config_path);
            if (seed_set) cfg.seed = seed;
            auto rows = genco::sweep_gamma(cfg, out_path);
            info("sweep finished with " + std::to_string(rows.size()) + " gamma values");
        } else if (dump->parsed()) {
            genco::LevelDataset ds = genco::load_levels(samples_path);
            std::string text = genco::dump_grids(ds.records);
            if (out_path.empty())
                std::cout << text;
            else {
                std::ofstream f(out_path, std::ios::binary);
                f << text;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
