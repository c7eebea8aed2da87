#include "genco/diff_layer.hpp"

#include <cstdlib>
#include <iostream>
#include <memory>

namespace genco {

namespace {

bool log_enabled() {
    const char* v = std::getenv("GENCO_LOG");
    return v && (std::string(v) == "info" || std::string(v) == "debug");
}

Vec solve_problem(const Vec& c, const SolverProblem& problem) {
    if (const auto* lp = std::get_if<LevelProblem>(&problem)) {
        ScoreField f{lp->spec.height, lp->spec.width, c};
        LevelSolution sol = project_level(f, lp->spec, lp->budget);
        Vec x = sol.one_hot();
        if (!check_feasible(x, lp->spec))
            throw ContractError("solver_layer: projection produced an infeasible level");
        return x;
    }
    const auto& pp = std::get<PathProblem>(problem);
    TerrainGrid grid{pp.height, pp.width, c, pp.src, pp.dst};
    PathSolution sol = shortest_path(grid);
    if (!valid_path(sol, grid))
        throw ContractError("solver_layer: shortest path failed its own invariants");
    return sol.indicator;
}

} // namespace

std::pair<Vec, SolveRecord> layer_forward(const Vec& c, const SolverLayerConfig& cfg,
                                          const SolverProblem& problem) {
    cfg.validate();
    if (!c.allFinite()) throw DomainError("layer_forward: non-finite coefficients");
    Vec x = solve_problem(c, problem);
    SolveRecord record{c, x, problem};
    return {std::move(x), std::move(record)};
}

Vec blackbox_backward(const SolveRecord& record, const Vec& g_x, double lambda) {
    if (!(lambda > 0.0)) throw ContractError("blackbox_backward: lambda must be positive");
    if (g_x.size() != record.x.size())
        throw DimensionError("blackbox_backward: gradient shape mismatch");
    Vec perturbed = record.c - lambda * g_x;
    if (std::holds_alternative<PathProblem>(record.problem))
        perturbed = perturbed.cwiseMax(0.0);
    Vec x_prime;
    try {
        x_prime = solve_problem(perturbed, record.problem);
    } catch (const SolverBudgetError& e) {
        if (log_enabled())
            std::cerr << "[genco] blackbox backward: " << e.what()
                      << "; returning zero gradient\n";
        return Vec::Zero(record.c.size());
    }
    return -(x_prime - record.x) / lambda;
}

Vec identity_backward(const SolveRecord& record, const Vec& g_x, bool project_grad) {
    if (g_x.size() != record.x.size())
        throw DimensionError("identity_backward: gradient shape mismatch");
    if (!project_grad || !std::holds_alternative<LevelProblem>(record.problem)) return g_x;
    Vec out = g_x;
    int cells = static_cast<int>(g_x.size()) / kNumTiles;
    for (int cell = 0; cell < cells; ++cell) {
        const double* g = out.data() + cell * kNumTiles;
        // pairwise sum: exact for a constant class row, so those cells zero out
        double m = (((g[0] + g[1]) + (g[2] + g[3])) + ((g[4] + g[5]) + (g[6] + g[7]))) /
                   kNumTiles;
        for (int t = 0; t < kNumTiles; ++t) out[cell * kNumTiles + t] -= m;
    }
    return out;
}

TensorF solver_layer(TensorF c, const SolverLayerConfig& cfg, const SolverProblem& problem) {
    auto [x, record] = layer_forward(c.data(), cfg, problem);
    Tape& tape = *c.tape();
    int src = c.id();
    auto rec = std::make_shared<SolveRecord>(std::move(record));
    SolverLayerConfig cfg_copy = cfg;
    std::vector<int> shape;
    if (const auto* pp = std::get_if<PathProblem>(&problem))
        shape = {pp->height, pp->width};
    else
        shape = {static_cast<int>(x.size())};
    return tape.make(std::move(shape), std::move(x), [src, rec, cfg_copy](Tape& tp, int self) {
        const Vec& g = tp.grad(self);
        Vec g_c = cfg_copy.method == DiffMethod::blackbox
                      ? blackbox_backward(*rec, g, cfg_copy.lambda)
                      : identity_backward(*rec, g, cfg_copy.project_grad);
        tp.grad(src) += g_c;
    });
}

} // namespace genco
