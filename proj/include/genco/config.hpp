#ifndef GENCO_CONFIG_HPP
#define GENCO_CONFIG_HPP

#include <string>
#include <vector>

#include "genco/train.hpp"

namespace genco {

struct EvalConfig {
    int n_eval = 1000;      // final sample count
    int k = 5;              // nearest-neighbor count for density/coverage
    int n_epoch_eval = 128; // per-epoch sample count for the metric log
};

// One experiment: regime, data, dims, and every module's knobs. Loaded from
// versioned JSON; unknown keys are rejected.
struct RunConfig {
    std::string regime = "constrained-gan"; // constrained-gan | penalized-gan |
                                            // vqvae | baseline-postprocess
    std::uint64_t seed = 42;
    std::string dataset;
    std::string init_checkpoint; // warm start (constrained regime)
    std::string checkpoint;      // written by run(); read by generate
    int level_height = 5;
    int level_width = 5;
    int terrain_height = 6;
    int terrain_width = 6;
    GanTrainConfig gan;
    PenalizedTrainConfig penalized;
    VqvaeTrainConfig vqvae;
    EvalConfig eval;

    LevelSpec level_spec() const { return LevelSpec::standard(level_height, level_width); }
    void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& cfg);
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

} // namespace genco

#endif // GENCO_CONFIG_HPP
