#ifndef GENCO_RUNNER_HPP
#define GENCO_RUNNER_HPP

#include "genco/config.hpp"
#include "genco/dataset.hpp"
#include "genco/metrics.hpp"

namespace genco {

// Full training run: trains the configured regime, writes metrics.tsv
// (epoch, group loss, individual loss, feasibility rate, uniqueness),
// checkpoint-final.txt, samples.txt, report.txt and the resolved config.json
// into out_dir, and returns the final report.
MetricReport run(const RunConfig& cfg, const std::string& out_dir);

// Sample from a finished run's checkpoint into a dataset file.
void generate_to_file(const RunConfig& cfg, int n, std::uint64_t seed,
                      const std::string& out_path);

// Standalone evaluation of a samples file against a reference dataset.
// Both files must be the same kind with matching dims. The adversarial
// group-loss column is only defined inside a run; here it reports 0.
MetricReport evaluate_files(const std::string& samples_path,
                            const std::string& reference_path, int k);

struct GammaSweepRow {
    double gamma = 0.0;
    double sp_loss = 0.0;
    double density = 0.0;
    double coverage = 0.0;
};

// Penalized-regime ablation over cfg.penalized.gamma_ladder; one run per
// gamma under out_dir/gamma_<i>, summary rows in out_dir/summary.tsv.
std::vector<GammaSweepRow> sweep_gamma(const RunConfig& cfg, const std::string& out_dir);

} // namespace genco

#endif // GENCO_RUNNER_HPP
