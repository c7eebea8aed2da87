#include "genco/train.hpp"

#include <algorithm>
#include <cmath>

namespace genco {

namespace {

constexpr std::uint64_t kTrainStreamId = 0x7e41;

TensorF constant_matrix(Tape& tape, const Mat& m) {
    RowMat rm = m;
    Vec flat = Eigen::Map<const Vec>(rm.data(), rm.size());
    return tape.constant({static_cast<int>(m.rows()), static_cast<int>(m.cols())},
                         std::move(flat));
}

TensorF constant_vector(Tape& tape, const Vec& v) {
    return tape.constant({static_cast<int>(v.size())}, v);
}

Mat sample_noise(RngStream& rng, int dim, int batch) {
    Mat noise(dim, batch);
    for (int j = 0; j < batch; ++j)
        for (int i = 0; i < dim; ++i) noise(i, j) = rng.normal();
    return noise;
}

std::vector<Activation> hidden_then(Activation last, std::size_t n_layers) {
    std::vector<Activation> acts(n_layers, Activation::relu);
    acts.back() = last;
    return acts;
}

std::vector<int> chain_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

// Mean critic score over the columns of a constant input matrix.
TensorF critic_mean(const DenseNet& adv, Tape& tape, const Mat& inputs) {
    TensorF batch = constant_matrix(tape, inputs);
    TensorF scores = forward(adv, tape, batch); // {1, K}
    return mean(scores);
}

// One Wasserstein critic update: minimize mean f(fake) - mean f(real),
// clip handled by the optimizer state.
void critic_update(GanModel& model, const Mat& reals, const Mat& fakes) {
    model.adv.zero_grads();
    Tape tape;
    TensorF loss = sub(critic_mean(model.adv, tape, fakes),
                       critic_mean(model.adv, tape, reals));
    backward(loss);
    optim_step(model.adv, model.opt_adv);
}

Mat sample_real_levels(const std::vector<LevelSolution>& data, int batch, RngStream& rng) {
    Mat out(data[0].cells() * kNumTiles, batch);
    for (int j = 0; j < batch; ++j)
        out.col(j) = data[rng.below(data.size())].one_hot();
    return out;
}

Mat sample_real_maps(const std::vector<Vec>& maps, int batch, RngStream& rng) {
    Mat out(maps[0].size(), batch);
    for (int j = 0; j < batch; ++j) out.col(j) = maps[rng.below(maps.size())];
    return out;
}

int batches_per_epoch(std::size_t n_data, int batch) {
    return std::max<int>(1, static_cast<int>((n_data + batch - 1) / batch));
}

} // namespace

void GanTrainConfig::validate() const {
    if (batch < 1) throw ContractError("GanTrainConfig: batch must be >= 1");
    if (noise_dim < 1) throw ContractError("GanTrainConfig: noise_dim must be >= 1");
    if (epochs < 0) throw ContractError("GanTrainConfig: epochs must be >= 0");
    if (adv_steps < 1) throw ContractError("GanTrainConfig: adv_steps must be >= 1");
    if (!(lr_gen > 0.0) || !(lr_adv > 0.0))
        throw ContractError("GanTrainConfig: learning rates must be positive");
    if (!(w_clip > 0.0)) throw ContractError("GanTrainConfig: w_clip must be positive");
    layer.validate();
}

void PenalizedTrainConfig::validate() const {
    GanTrainConfig::validate();
    if (gamma < 0.0) throw ContractError("PenalizedTrainConfig: gamma must be >= 0");
}

void VqvaeTrainConfig::validate() const {
    if (codebook_size < 2) throw ContractError("VqvaeTrainConfig: codebook_size must be >= 2");
    if (embed_dim < 1) throw ContractError("VqvaeTrainConfig: embed_dim must be >= 1");
    if (beta1 < 0.0 || beta2 < 0.0 || commit < 0.0)
        throw ContractError("VqvaeTrainConfig: loss weights must be >= 0");
    if (!(lr > 0.0)) throw ContractError("VqvaeTrainConfig: lr must be positive");
    if (epochs < 0) throw ContractError("VqvaeTrainConfig: epochs must be >= 0");
    layer.validate();
}

GanModel make_level_gan(const GanTrainConfig& cfg, const LevelSpec& spec, RngStream init_rng) {
    cfg.validate();
    spec.validate();
    GanModel m;
    m.gen = DenseNet::make(chain_dims(cfg.noise_dim, cfg.gen_hidden, spec.vars()),
                           hidden_then(Activation::identity, cfg.gen_hidden.size() + 1),
                           init_rng);
    m.adv = DenseNet::make(chain_dims(spec.vars(), cfg.adv_hidden, 1),
                           hidden_then(Activation::identity, cfg.adv_hidden.size() + 1),
                           init_rng);
    m.opt_gen = OptimState(cfg.optim, cfg.lr_gen, m.gen.param_count());
    m.opt_adv = OptimState(cfg.optim, cfg.lr_adv, m.adv.param_count(), cfg.w_clip);
    m.rng = init_rng.fork(kTrainStreamId);
    return m;
}

GanModel make_terrain_gan(const GanTrainConfig& cfg, int height, int width, RngStream init_rng) {
    cfg.validate();
    int vars = height * width * kNumTiles;
    GanModel m;
    // Sigmoid head keeps the generated maps inside the cost map's [0,1] domain.
    m.gen = DenseNet::make(chain_dims(cfg.noise_dim, cfg.gen_hidden, vars),
                           hidden_then(Activation::sigmoid, cfg.gen_hidden.size() + 1),
                           init_rng);
    m.adv = DenseNet::make(chain_dims(vars, cfg.adv_hidden, 1),
                           hidden_then(Activation::identity, cfg.adv_hidden.size() + 1),
                           init_rng);
    m.opt_gen = OptimState(cfg.optim, cfg.lr_gen, m.gen.param_count());
    m.opt_adv = OptimState(cfg.optim, cfg.lr_adv, m.adv.param_count(), cfg.w_clip);
    m.rng = init_rng.fork(kTrainStreamId);
    return m;
}

VqvaeModel make_vqvae(const VqvaeTrainConfig& cfg, const LevelSpec& spec, RngStream init_rng) {
    cfg.validate();
    spec.validate();
    VqvaeModel m;
    m.enc = DenseNet::make(chain_dims(spec.vars(), cfg.enc_hidden, cfg.embed_dim),
                           hidden_then(Activation::identity, cfg.enc_hidden.size() + 1),
                           init_rng);
    m.dec = DenseNet::make(chain_dims(cfg.embed_dim, cfg.dec_hidden, spec.vars()),
                           hidden_then(Activation::identity, cfg.dec_hidden.size() + 1),
                           init_rng);
    m.codebook = Mat(cfg.codebook_size, cfg.embed_dim);
    double s = 1.0 / std::sqrt(static_cast<double>(cfg.embed_dim));
    for (int r = 0; r < m.codebook.rows(); ++r)
        for (int c = 0; c < m.codebook.cols(); ++c) m.codebook(r, c) = init_rng.normal() * s;
    m.g_codebook = Mat::Zero(cfg.codebook_size, cfg.embed_dim);
    Eigen::Index n_params = m.enc.param_count() + m.dec.param_count() + m.codebook.size();
    m.opt = OptimState(cfg.optim, cfg.lr, n_params);
    m.rng = init_rng.fork(kTrainStreamId);
    return m;
}

int nearest_code(const Mat& codebook, const Vec& z_e) {
    if (codebook.rows() == 0) throw ContractError("nearest_code: empty codebook");
    if (codebook.cols() != z_e.size())
        throw DimensionError("nearest_code: embedding size mismatch");
    int best = 0;
    double best_d = (codebook.row(0).transpose() - z_e).squaredNorm();
    for (int k = 1; k < codebook.rows(); ++k) {
        double d = (codebook.row(k).transpose() - z_e).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

void genco_step(DenseNet& gen, OptimState& opt, RngStream& rng, int noise_dim, int batch,
                const SolverLayerConfig& layer_cfg, const SolverProblem& problem,
                const StepLosses& losses) {
    if (!losses.group) throw ContractError("genco_step: group loss is required");
    if (losses.gamma != 0.0 && !losses.individual)
        throw ContractError("genco_step: gamma != 0 needs an individual loss");
    gen.zero_grads();
    Tape tape;
    TensorF eps = constant_matrix(tape, sample_noise(rng, noise_dim, batch));
    TensorF c = forward(gen, tape, eps); // {out, K}
    std::vector<TensorF> xs, cs, coeffs;
    xs.reserve(batch);
    cs.reserve(batch);
    coeffs.reserve(batch);
    for (int j = 0; j < batch; ++j) {
        TensorF cj = col(c, j);
        TensorF co = losses.transform ? losses.transform(tape, cj) : cj;
        xs.push_back(solver_layer(co, layer_cfg, problem));
        cs.push_back(cj);
        coeffs.push_back(co);
    }
    TensorF total = losses.group(tape, xs, cs);
    if (losses.gamma != 0.0) {
        std::vector<TensorF> ds;
        ds.reserve(batch);
        for (int j = 0; j < batch; ++j) ds.push_back(losses.individual(tape, xs[j], coeffs[j]));
        total = add(total, scale(add_all(tape, ds), losses.gamma / batch));
    }
    backward(total);
    optim_step(gen, opt);
}

void constrained_gan_epoch(GanModel& model, const std::vector<LevelSolution>& data,
                           const GanTrainConfig& cfg, const LevelSpec& spec) {
    cfg.validate();
    if (data.empty()) throw ContractError("constrained_gan_epoch: empty dataset");
    for (const auto& d : data)
        if (!check_feasible(d, spec))
            throw ContractError("constrained_gan_epoch: dataset contains an infeasible level");

    SolverProblem problem = LevelProblem{spec, cfg.solver_budget};
    const DenseNet& adv = model.adv;
    StepLosses losses;
    losses.group = [&adv](Tape& tape, const std::vector<TensorF>& xs,
                          const std::vector<TensorF>&) {
        std::vector<TensorF> scores;
        scores.reserve(xs.size());
        for (const auto& x : xs) scores.push_back(forward(adv, tape, x));
        return scale(add_all(tape, scores), -1.0 / static_cast<double>(xs.size()));
    };

    int batches = batches_per_epoch(data.size(), cfg.batch);
    for (int b = 0; b < batches; ++b) {
        if (cfg.adversary_mode == AdversaryMode::updated) {
            for (int s = 0; s < cfg.adv_steps; ++s) {
                Mat reals = sample_real_levels(data, cfg.batch, model.rng);
                Mat noise = sample_noise(model.rng, cfg.noise_dim, cfg.batch);
                Mat c = model.gen.eval(noise);
                Mat fakes(spec.vars(), cfg.batch);
                for (int j = 0; j < cfg.batch; ++j) {
                    auto [x, rec] = layer_forward(c.col(j), cfg.layer, problem);
                    fakes.col(j) = x;
                }
                critic_update(model, reals, fakes);
            }
        }
        genco_step(model.gen, model.opt_gen, model.rng, cfg.noise_dim, cfg.batch, cfg.layer,
                   problem, losses);
        model.adv.zero_grads();
        ++model.step;
    }
}

double semantic_penalty(const Vec& c, int height, int width) {
    TerrainGrid g = cost_map(c, height, width);
    return g.node_costs.mean();
}

TensorF semantic_penalty_op(TensorF c, int height, int width) {
    return mean(cost_map_op(c, height, width));
}

void penalized_gan_epoch(GanModel& model, const std::vector<Vec>& maps,
                         const PenalizedTrainConfig& cfg, int height, int width) {
    cfg.validate();
    if (maps.empty()) throw ContractError("penalized_gan_epoch: empty dataset");
    int vars = height * width * kNumTiles;
    for (const auto& m : maps)
        if (m.size() != vars)
            throw DimensionError("penalized_gan_epoch: map size does not match dims");

    const DenseNet& adv = model.adv;
    auto group = [&adv](Tape& tape, const std::vector<TensorF>&,
                        const std::vector<TensorF>& cs) {
        std::vector<TensorF> scores;
        scores.reserve(cs.size());
        for (const auto& cj : cs) scores.push_back(forward(adv, tape, cj));
        return scale(add_all(tape, scores), -1.0 / static_cast<double>(cs.size()));
    };

    int batches = batches_per_epoch(maps.size(), cfg.batch);
    for (int b = 0; b < batches; ++b) {
        if (cfg.adversary_mode == AdversaryMode::updated) {
            for (int s = 0; s < cfg.adv_steps; ++s) {
                Mat reals = sample_real_maps(maps, cfg.batch, model.rng);
                Mat fakes = model.gen.eval(sample_noise(model.rng, cfg.noise_dim, cfg.batch));
                critic_update(model, reals, fakes);
            }
        }
        if (cfg.penalty == PenaltyMode::shortest_path) {
            StepLosses losses;
            losses.group = group;
            losses.transform = [height, width](Tape&, TensorF cj) {
                return cost_map_op(cj, height, width);
            };
            losses.individual = [](Tape&, TensorF x, TensorF coeffs) {
                return sum(mul(coeffs, x));
            };
            losses.gamma = cfg.gamma;
            genco_step(model.gen, model.opt_gen, model.rng, cfg.noise_dim, cfg.batch, cfg.layer,
                       PathProblem::corner_to_corner(height, width), losses);
        } else {
            // Mean-cost penalty; no solver in the loop.
            model.gen.zero_grads();
            Tape tape;
            TensorF eps =
                constant_matrix(tape, sample_noise(model.rng, cfg.noise_dim, cfg.batch));
            TensorF c = forward(model.gen, tape, eps);
            std::vector<TensorF> scores, pens;
            for (int j = 0; j < cfg.batch; ++j) {
                TensorF cj = col(c, j);
                scores.push_back(forward(adv, tape, cj));
                if (cfg.gamma != 0.0) pens.push_back(semantic_penalty_op(cj, height, width));
            }
            TensorF total = scale(add_all(tape, scores), -1.0 / cfg.batch);
            if (cfg.gamma != 0.0)
                total = add(total, scale(add_all(tape, pens), cfg.gamma / cfg.batch));
            backward(total);
            optim_step(model.gen, model.opt_gen);
        }
        model.adv.zero_grads();
        ++model.step;
    }
}

void postprocess_baseline_epoch(GanModel& model, const std::vector<LevelSolution>& data,
                                const GanTrainConfig& cfg, const LevelSpec& spec) {
    cfg.validate();
    if (data.empty()) throw ContractError("postprocess_baseline_epoch: empty dataset");
    for (const auto& d : data)
        if (!check_feasible(d, spec))
            throw ContractError("postprocess_baseline_epoch: dataset contains an infeasible level");

    const DenseNet& adv = model.adv;
    int batches = batches_per_epoch(data.size(), cfg.batch);
    for (int b = 0; b < batches; ++b) {
        if (cfg.adversary_mode == AdversaryMode::updated) {
            for (int s = 0; s < cfg.adv_steps; ++s) {
                Mat reals = sample_real_levels(data, cfg.batch, model.rng);
                Mat fakes = model.gen.eval(sample_noise(model.rng, cfg.noise_dim, cfg.batch));
                critic_update(model, reals, fakes);
            }
        }
        // Generator sees the adversary on its continuous output; no solver.
        model.gen.zero_grads();
        Tape tape;
        TensorF eps = constant_matrix(tape, sample_noise(model.rng, cfg.noise_dim, cfg.batch));
        TensorF c = forward(model.gen, tape, eps);
        TensorF scores = forward(adv, tape, c); // adversary consumes the whole batch
        TensorF total = scale(mean(scores), -1.0);
        backward(total);
        optim_step(model.gen, model.opt_gen);
        model.adv.zero_grads();
        ++model.step;
    }
}

namespace {

void vq_gather(const VqvaeModel& m, Vec& params, Vec& grads) {
    Vec pe, pd, ge, gd;
    m.enc.gather_params(pe);
    m.dec.gather_params(pd);
    m.enc.gather_grads(ge);
    m.dec.gather_grads(gd);
    Eigen::Index nc = m.codebook.size();
    params.resize(pe.size() + pd.size() + nc);
    grads.resize(params.size());
    params << pe, pd, Eigen::Map<const Vec>(m.codebook.data(), nc);
    grads << ge, gd, Eigen::Map<const Vec>(m.g_codebook.data(), nc);
}

void vq_scatter(VqvaeModel& m, const Vec& params) {
    Eigen::Index ne = m.enc.param_count();
    Eigen::Index nd = m.dec.param_count();
    m.enc.scatter_params(params.head(ne));
    m.dec.scatter_params(params.segment(ne, nd));
    Eigen::Map<Vec>(m.codebook.data(), m.codebook.size()) = params.tail(m.codebook.size());
}

} // namespace

void vqvae_step(VqvaeModel& model, const LevelSolution& datum, const VqvaeTrainConfig& cfg,
                const LevelSpec& spec) {
    cfg.validate();
    if (!check_feasible(datum, spec)) throw ContractError("vqvae_step: datum is infeasible");

    model.enc.zero_grads();
    model.dec.zero_grads();
    model.g_codebook.setZero();

    Tape tape;
    TensorF input = constant_vector(tape, datum.one_hot());
    TensorF z_e = forward(model.enc, tape, input);
    int kstar = nearest_code(model.codebook, z_e.data());
    Vec e_k = model.codebook.row(kstar).transpose();

    VqvaeModel* mp = &model;
    TensorF e_node = tape.make({cfg.embed_dim}, e_k, [mp, kstar](Tape& tp, int self) {
        mp->g_codebook.row(kstar) += tp.grad(self).transpose();
    });

    // || sg(z_e) - e_k ||^2 pulls the codebook toward the encoder output;
    // gamma_commit * || z_e - sg(e_k) ||^2 pulls the encoder toward the code.
    TensorF l_quant = sq_norm(sub(e_node, constant_vector(tape, z_e.data())));
    TensorF l_commit = sq_norm(sub(z_e, constant_vector(tape, e_k)));
    TensorF total = add(scale(l_quant, cfg.beta1), scale(l_commit, cfg.commit));

    if (cfg.use_recon || cfg.use_objective) {
        TensorF dec_in = straight_through(z_e, e_k);
        TensorF c_tilde = forward(model.dec, tape, dec_in);
        TensorF x_tilde =
            solver_layer(c_tilde, cfg.layer, LevelProblem{spec, cfg.solver_budget});
        if (cfg.use_recon) total = add(total, sq_norm(sub(x_tilde, input)));
        if (cfg.use_objective) {
            TensorF costs = cost_map_op(x_tilde, spec.height, spec.width);
            TensorF sp = solver_layer(costs, SolverLayerConfig{DiffMethod::identity, 20.0, false},
                                      PathProblem::corner_to_corner(spec.height, spec.width));
            total = add(total, scale(sum(mul(costs, sp)), cfg.beta2));
        }
    }

    backward(total);
    Vec params, grads;
    vq_gather(model, params, grads);
    check_finite(grads, "vqvae_step grads");
    model.opt.apply(params, grads);
    check_finite(params, "vqvae_step params");
    vq_scatter(model, params);
    model.enc.zero_grads();
    model.dec.zero_grads();
    model.g_codebook.setZero();
    ++model.step;
}

double vqvae_recon_loss(const VqvaeModel& model, const LevelSolution& datum,
                        const LevelSpec& spec, long solver_budget) {
    Vec x = datum.one_hot();
    Vec z_e = model.enc.eval(x);
    int kstar = nearest_code(model.codebook, z_e);
    Vec c_tilde = model.dec.eval(Vec(model.codebook.row(kstar).transpose()));
    ScoreField f{spec.height, spec.width, c_tilde};
    LevelSolution recon = project_level(f, spec, solver_budget);
    return (x - recon.one_hot()).squaredNorm();
}

std::vector<LevelSolution> generate_levels(const DenseNet& gen, int n, RngStream& rng,
                                           int noise_dim, const LevelSpec& spec, long budget) {
    std::vector<LevelSolution> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec noise(noise_dim);
        for (int d = 0; d < noise_dim; ++d) noise[d] = rng.normal();
        Vec c = gen.eval(noise);
        ScoreField f{spec.height, spec.width, c};
        LevelSolution x = project_level(f, spec, budget);
        if (!check_feasible(x, spec))
            throw ContractError("generate_levels: projection produced an infeasible level");
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<Vec> generate_maps(const DenseNet& gen, int n, RngStream& rng, int noise_dim) {
    std::vector<Vec> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec noise(noise_dim);
        for (int d = 0; d < noise_dim; ++d) noise[d] = rng.normal();
        out.push_back(gen.eval(noise));
    }
    return out;
}

std::vector<PathSolution> paths_for_maps(const std::vector<Vec>& maps, int height, int width) {
    std::vector<PathSolution> out;
    out.reserve(maps.size());
    for (const auto& m : maps) {
        TerrainGrid grid = cost_map(m, height, width);
        PathSolution p = shortest_path(grid);
        if (!valid_path(p, grid))
            throw ContractError("paths_for_maps: invalid shortest path");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<LevelSolution> generate_vqvae_levels(const VqvaeModel& model, int n, RngStream& rng,
                                                 const LevelSpec& spec, long budget) {
    std::vector<LevelSolution> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        int k = static_cast<int>(rng.below(model.codebook.rows()));
        Vec c = model.dec.eval(Vec(model.codebook.row(k).transpose()));
        ScoreField f{spec.height, spec.width, c};
        LevelSolution x = project_level(f, spec, budget);
        if (!check_feasible(x, spec))
            throw ContractError("generate_vqvae_levels: projection produced an infeasible level");
        out.push_back(std::move(x));
    }
    return out;
}

double level_individual_loss(const LevelSolution& x) {
    TerrainGrid g = cost_map(x.one_hot(), x.height, x.width);
    return shortest_path(g).total_cost;
}

} // namespace genco
