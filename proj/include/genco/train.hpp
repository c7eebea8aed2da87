#ifndef GENCO_TRAIN_HPP
#define GENCO_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genco/diff_layer.hpp"
#include "genco/net.hpp"

namespace genco {

enum class AdversaryMode { fixed, updated };
enum class PenaltyMode { shortest_path, semantic };

struct GanTrainConfig {
    int noise_dim = 16;
    int batch = 32; // K
    int epochs = 30;
    int adv_steps = 5; // adversary updates per generator update
    double w_clip = 0.01;
    double lr_gen = 1e-3;
    double lr_adv = 1e-3;
    OptimMethod optim = OptimMethod::adam;
    std::vector<int> gen_hidden{64, 64};
    std::vector<int> adv_hidden{64, 64};
    SolverLayerConfig layer{DiffMethod::blackbox, 10.0, false};
    AdversaryMode adversary_mode = AdversaryMode::updated;
    long solver_budget = kDefaultProjectBudget;

    void validate() const;
};

struct PenalizedTrainConfig : GanTrainConfig {
    double gamma = 0.0; // weight on the solver objective
    PenaltyMode penalty = PenaltyMode::shortest_path;
    // Ablation ladder for the sweep command: 0 plus five increasing weights.
    std::vector<double> gamma_ladder{0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};

    PenalizedTrainConfig() {
        layer = SolverLayerConfig{DiffMethod::identity, 20.0, false};
        epochs = 40;
    }
    void validate() const;
};

struct VqvaeTrainConfig {
    int codebook_size = 16; // K_code
    int embed_dim = 8;
    double beta1 = 1.0;   // quantization loss weight
    double beta2 = 1.0;   // objective loss weight
    double commit = 0.25; // commitment weight
    int epochs = 60;
    double lr = 1e-3;
    OptimMethod optim = OptimMethod::adam;
    std::vector<int> enc_hidden{64};
    std::vector<int> dec_hidden{64};
    bool use_recon = true;
    bool use_objective = false;
    SolverLayerConfig layer{DiffMethod::blackbox, 10.0, false};
    long solver_budget = kDefaultProjectBudget;

    void validate() const;
};

// Generator/adversary pair with their optimizers and the run's noise stream.
struct GanModel {
    DenseNet gen;
    DenseNet adv;
    OptimState opt_gen;
    OptimState opt_adv;
    RngStream rng;
    std::int64_t step = 0;
};

GanModel make_level_gan(const GanTrainConfig& cfg, const LevelSpec& spec, RngStream init_rng);
GanModel make_terrain_gan(const GanTrainConfig& cfg, int height, int width, RngStream init_rng);

struct VqvaeModel {
    DenseNet enc;
    DenseNet dec;
    Mat codebook;   // K_code x embed_dim
    Mat g_codebook; // gradient accumulator
    OptimState opt; // joint step over enc + dec + codebook
    RngStream rng;
    std::int64_t step = 0;
};

VqvaeModel make_vqvae(const VqvaeTrainConfig& cfg, const LevelSpec& spec, RngStream init_rng);

// Nearest codebook row by squared distance, lowest index on ties.
int nearest_code(const Mat& codebook, const Vec& z_e);

// ---- generic GenCO step ------------------------------------------------------
//
// One gradient update of the generator on L({x_j}) + gamma * mean_j D(x_j),
// where x_j = solve(transform(G(eps_j))). Every x_j is an exact, audited
// solver output. With gamma == 0 the individual term is never built, so the
// gradient is bitwise the group-only gradient.

struct StepLosses {
    // Scalar group loss over the batch; xs are solver outputs, cs generator
    // outputs (latent). Required.
    std::function<TensorF(Tape&, const std::vector<TensorF>& xs,
                          const std::vector<TensorF>& cs)> group;
    // Scalar per-sample individual loss D(x_j); receives the solver output
    // and the solver coefficients. Ignored when gamma == 0.
    std::function<TensorF(Tape&, TensorF x, TensorF coeffs)> individual;
    // Optional map from generator output to solver coefficients (e.g. the
    // tile->cost transform). Identity when absent.
    std::function<TensorF(Tape&, TensorF c)> transform;
    double gamma = 0.0;
};

void genco_step(DenseNet& gen, OptimState& opt, RngStream& rng, int noise_dim, int batch,
                const SolverLayerConfig& layer_cfg, const SolverProblem& problem,
                const StepLosses& losses);

// ---- training regimes --------------------------------------------------------

// Constrained WGAN epoch: adversary scores only feasible solutions x; the
// generator trains through the solver layer. With AdversaryMode::fixed the
// adversary is left untouched. Data must all be feasible.
void constrained_gan_epoch(GanModel& model, const std::vector<LevelSolution>& data,
                           const GanTrainConfig& cfg, const LevelSpec& spec);

// Penalized epoch on terrain maps: adversarial loss on the latent maps c
// plus gamma times the shortest-path cost through the tile->cost transform
// (or the mean-cost semantic penalty, depending on cfg.penalty).
void penalized_gan_epoch(GanModel& model, const std::vector<Vec>& maps,
                         const PenalizedTrainConfig& cfg, int height, int width);

// Mean of the cost map over all cells; the semantic-loss baseline penalty.
double semantic_penalty(const Vec& c, int height, int width);
TensorF semantic_penalty_op(TensorF c, int height, int width);

// Plain WGAN on continuous generator outputs against one-hot reals;
// projection happens only at generation time.
void postprocess_baseline_epoch(GanModel& model, const std::vector<LevelSolution>& data,
                                const GanTrainConfig& cfg, const LevelSpec& spec);

// One VQVAE update on a single feasible level: encode, quantize
// (straight-through), decode, project to a feasible level, then combine
// reconstruction / quantization / commitment / objective terms.
void vqvae_step(VqvaeModel& model, const LevelSolution& datum, const VqvaeTrainConfig& cfg,
                const LevelSpec& spec);

// Reconstruction loss ||x - x_tilde||^2 of one datum without updating
// anything (the projected decode against the input).
double vqvae_recon_loss(const VqvaeModel& model, const LevelSolution& datum,
                        const LevelSpec& spec, long solver_budget);

// ---- sampling ----------------------------------------------------------------

std::vector<LevelSolution> generate_levels(const DenseNet& gen, int n, RngStream& rng,
                                           int noise_dim, const LevelSpec& spec, long budget);
std::vector<Vec> generate_maps(const DenseNet& gen, int n, RngStream& rng, int noise_dim);
std::vector<PathSolution> paths_for_maps(const std::vector<Vec>& maps, int height, int width);
std::vector<LevelSolution> generate_vqvae_levels(const VqvaeModel& model, int n, RngStream& rng,
                                                 const LevelSpec& spec, long budget);

// Individual loss for a level: shortest-path cost over its cost map,
// corner to corner. Also used for the report columns.
double level_individual_loss(const LevelSolution& x);

} // namespace genco

#endif // GENCO_TRAIN_HPP
