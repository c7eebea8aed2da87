#ifndef GENCO_PATHS_HPP
#define GENCO_PATHS_HPP

#include <array>
#include <vector>

#include "genco/level.hpp"
#include "genco/tensor.hpp"

namespace genco {

// Fixed tile -> node cost table (published in the config reference). Walls
// are the mountain-like expensive class, empty is free land.
inline constexpr std::array<double, kNumTiles> kTileCostTable = {
    9.0, // wall
    0.0, // empty
    1.0, // key
    1.0, // exit
    2.0, // enemy1
    4.0, // enemy2
    6.0, // enemy3
    1.0, // player
};

// Node-cost grid with fixed endpoints. Costs are per cell, not per edge; a
// path pays every cell it visits, endpoints included.
struct TerrainGrid {
    int height = 0;
    int width = 0;
    Vec node_costs; // length H*W, all >= 0
    int src = 0;
    int dst = 0;

    int cells() const { return height * width; }

    static TerrainGrid corner_to_corner(int height, int width, Vec costs);
};

struct PathSolution {
    int height = 0;
    int width = 0;
    Vec indicator;          // length H*W, 1.0 on path cells
    std::vector<int> cells; // path order, src first
    double total_cost = 0;  // row-major sum of node costs over path cells
};

// Minimal-cost 4-connected simple path from src to dst under node costs.
// Dijkstra with deterministic tie-breaks: the frontier pops the smallest
// (distance, cell index) and predecessors only change on strict improvement,
// so equal-cost paths resolve the same way on every run.
PathSolution shortest_path(const TerrainGrid& t);

// Validates the PathSolution invariants against a grid (single 4-connected
// simple path between the endpoints, cost consistent with the indicator).
bool valid_path(const PathSolution& p, const TerrainGrid& t);

// Linear map from per-cell class probabilities (H*W*8, values in [0,1]) to
// node costs via kTileCostTable. Throws DomainError on out-of-range values.
TerrainGrid cost_map(const Vec& tiles, int height, int width);

// Tape version of cost_map: value is the node-cost grid, backward routes
// g(cell) * table(class) into the tile tensor.
TensorF cost_map_op(TensorF tiles, int height, int width);

} // namespace genco

#endif // GENCO_PATHS_HPP
