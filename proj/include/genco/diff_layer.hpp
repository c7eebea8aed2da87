#ifndef GENCO_DIFF_LAYER_HPP
#define GENCO_DIFF_LAYER_HPP

#include <variant>

#include "genco/level_solver.hpp"
#include "genco/paths.hpp"
#include "genco/tensor.hpp"

namespace genco {

enum class DiffMethod { blackbox, identity };

struct SolverLayerConfig {
    DiffMethod method = DiffMethod::blackbox;
    double lambda = 10.0;     // blackbox interpolation strength
    bool project_grad = false; // identity variant: remove per-cell class mean

    void validate() const {
        if (method == DiffMethod::blackbox && !(lambda > 0.0))
            throw ContractError("SolverLayerConfig: lambda must be positive for blackbox");
    }
};

struct LevelProblem {
    LevelSpec spec;
    long budget = kDefaultProjectBudget;
};

struct PathProblem {
    int height = 0;
    int width = 0;
    int src = 0;
    int dst = 0;

    static PathProblem corner_to_corner(int height, int width) {
        return {height, width, 0, height * width - 1};
    }
};

using SolverProblem = std::variant<LevelProblem, PathProblem>;

// Forward cache: the exact input/output pair of one solve.
struct SolveRecord {
    Vec c;
    Vec x;
    SolverProblem problem;
};

// Exact solve of `problem` at coefficients c. The output is audited against
// the problem's feasibility predicate before it is returned, so anything a
// loss ever sees is feasible. Solver errors propagate.
std::pair<Vec, SolveRecord> layer_forward(const Vec& c, const SolverLayerConfig& cfg,
                                          const SolverProblem& problem);

// Perturb-and-resolve gradient: x' = solve(c - lambda * g_x), returns
// -(x' - x) / lambda, the zero tensor when the perturbed argmax is
// unchanged. A budget failure of the inner solve also yields zero (logged)
// rather than failing the step. For path problems the perturbed costs are
// clamped at 0 to stay inside Dijkstra's domain.
Vec blackbox_backward(const SolveRecord& record, const Vec& g_x, double lambda);

// Pass-through gradient; with project_grad, removes the per-cell mean across
// the class axis first (level problems only; path grids have no class axis).
Vec identity_backward(const SolveRecord& record, const Vec& g_x, bool project_grad);

// Tape node wrapping the solver: value is the exact solution, backward
// dispatches on cfg.method. Level solutions come out flat ({H*W*8}), path
// indicators as {H, W}.
TensorF solver_layer(TensorF c, const SolverLayerConfig& cfg, const SolverProblem& problem);

} // namespace genco

#endif // GENCO_DIFF_LAYER_HPP
