#ifndef GENCO_LEVEL_SOLVER_HPP
#define GENCO_LEVEL_SOLVER_HPP

#include "genco/level.hpp"

namespace genco {

inline constexpr long kDefaultProjectBudget = 200'000'000;

// Exact argmax of <c, x> over the feasible set defined by `spec`.
//
// Depth-first branch and bound over cells in row-major order, classes in
// ascending index order. Two admissible bounds prune the search: the plain
// suffix sum of per-cell maxima and a capacity-aware bound that charges
// count-limited classes only their best remaining gains over the empty
// filler. Connectivity is enforced by lazy rejection at leaves plus an
// optimistic reachability cut (unassigned cells treated as passable).
//
// Ties: among optimal solutions the lexicographically smallest assignment
// sequence (row-major cells, ascending class index) is returned.
//
// Throws DomainError on non-finite scores, InfeasibleError when the spec
// admits no level, SolverBudgetError when `budget` node expansions are
// exhausted (never returns a possibly suboptimal level).
LevelSolution project_level(const ScoreField& c, const LevelSpec& spec,
                            long budget = kDefaultProjectBudget);

// Exhaustive reference solver for grids with at most 9 cells: enumerates
// every count-respecting assignment and filters by feasibility, with
// connectivity looked up from a precomputed wall-mask component table.
// Same tie-break as project_level. Throws BoundError on larger grids.
LevelSolution brute_force_project(const ScoreField& c, const LevelSpec& spec);

// Canonical objective <c, x>: accumulated cell by cell in row-major order so
// both solvers and every test compare bit-identical sums.
double level_objective(const ScoreField& c, const LevelSolution& x);

} // namespace genco

#endif // GENCO_LEVEL_SOLVER_HPP
