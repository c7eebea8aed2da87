#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "genco/paths.hpp"
#include "genco/rng.hpp"

using namespace genco;

namespace {

// Exhaustive enumeration of all simple 4-connected paths src->dst; the
// minimal canonical (row-major re-summed) cost is the reference optimum.
struct PathEnumerator {
    const TerrainGrid& t;
    std::vector<char> visited;
    double best = std::numeric_limits<double>::infinity();
    long paths_seen = 0;

    explicit PathEnumerator(const TerrainGrid& grid) : t(grid), visited(grid.cells(), 0) {}

    void walk(int cell) {
        visited[cell] = 1;
        if (cell == t.dst) {
            double cost = 0.0;
            for (int i = 0; i < t.cells(); ++i)
                if (visited[i]) cost += t.node_costs[i];
            best = std::min(best, cost);
            ++paths_seen;
        } else {
            int r = cell / t.width, c = cell % t.width;
            const int dr[4] = {-1, 1, 0, 0};
            const int dc[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                int nr = r + dr[k], nc = c + dc[k];
                if (nr < 0 || nr >= t.height || nc < 0 || nc >= t.width) continue;
                int nxt = nr * t.width + nc;
                if (!visited[nxt]) walk(nxt);
            }
        }
        visited[cell] = 0;
    }

    double run() {
        walk(t.src);
        return best;
    }
};

Vec random_costs(int n, RngStream& rng, double lo = 0.0, double hi = 5.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

} // namespace

TEST_CASE("1x1 grid: src equals dst, path is the single cell") {
    TerrainGrid t = TerrainGrid::corner_to_corner(1, 1, Vec::Constant(1, 5.0));
    PathSolution p = shortest_path(t);
    CHECK(p.indicator[0] == 1.0);
    CHECK(p.total_cost == 5.0);
    CHECK(p.cells == std::vector<int>{0});
    CHECK(valid_path(p, t));
}

TEST_CASE("2x2 grid picks the cheaper monotone path") {
    Vec costs(4);
    costs << 1, 2, 3, 4;
    TerrainGrid t = TerrainGrid::corner_to_corner(2, 2, costs);
    PathSolution p = shortest_path(t);
    CHECK(p.total_cost == 7.0); // 1 + 2 + 4, not 1 + 3 + 4 = 8
    CHECK(p.cells == std::vector<int>{0, 1, 3});
    CHECK(valid_path(p, t));
}

TEST_CASE("dijkstra matches exhaustive enumeration on random 4x4 grids") {
    RngStream rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        TerrainGrid t = TerrainGrid::corner_to_corner(4, 4, random_costs(16, rng));
        PathSolution p = shortest_path(t);
        REQUIRE(valid_path(p, t));
        PathEnumerator oracle(t);
        CHECK(p.total_cost == oracle.run());
    }
}

TEST_CASE("dijkstra handles non-corner endpoints") {
    RngStream rng(32);
    for (int trial = 0; trial < 25; ++trial) {
        TerrainGrid t;
        t.height = 3;
        t.width = 4;
        t.node_costs = random_costs(12, rng);
        t.src = static_cast<int>(rng.below(12));
        t.dst = static_cast<int>(rng.below(12));
        PathSolution p = shortest_path(t);
        REQUIRE(valid_path(p, t));
        PathEnumerator oracle(t);
        CHECK(p.total_cost == oracle.run());
    }
}

TEST_CASE("shortest path is never beaten by random feasible paths") {
    RngStream rng(33);
    TerrainGrid t = TerrainGrid::corner_to_corner(5, 5, random_costs(25, rng));
    PathSolution p = shortest_path(t);
    // random monotone (right/down) paths are all feasible
    for (int trial = 0; trial < 200; ++trial) {
        double cost = t.node_costs[0];
        int r = 0, c = 0;
        while (r != 4 || c != 4) {
            bool down = (r < 4) && (c == 4 || rng.below(2) == 0);
            if (down)
                ++r;
            else
                ++c;
            cost += t.node_costs[r * 5 + c];
        }
        CHECK(p.total_cost <= cost);
    }
}

TEST_CASE("deterministic output across repeated solves") {
    RngStream rng(34);
    TerrainGrid t = TerrainGrid::corner_to_corner(4, 4, Vec::Zero(16)); // all ties
    PathSolution a = shortest_path(t);
    PathSolution b = shortest_path(t);
    CHECK(a.cells == b.cells);
    CHECK(a.indicator == b.indicator);
}

TEST_CASE("negative or non-finite costs are a domain error") {
    Vec bad(4);
    bad << 1, -0.5, 2, 3;
    TerrainGrid t = TerrainGrid::corner_to_corner(2, 2, bad);
    CHECK_THROWS_AS(shortest_path(t), DomainError);
    bad << 1, std::numeric_limits<double>::infinity(), 2, 3;
    TerrainGrid t2 = TerrainGrid::corner_to_corner(2, 2, bad);
    CHECK_THROWS_AS(shortest_path(t2), DomainError);
}

TEST_CASE("cost_map: one-hot cells read the table") {
    Vec tiles = Vec::Zero(kNumTiles);
    tiles[kEmpty] = 1.0;
    CHECK(cost_map(tiles, 1, 1).node_costs[0] == 0.0);
    tiles.setZero();
    tiles[kWall] = 1.0;
    CHECK(cost_map(tiles, 1, 1).node_costs[0] == 9.0);
}

TEST_CASE("cost_map: uniform mixture gives the table mean") {
    Vec tiles = Vec::Constant(kNumTiles, 1.0 / kNumTiles);
    double mean = 0.0;
    for (double v : kTileCostTable) mean += v;
    mean /= kNumTiles;
    CHECK(std::abs(cost_map(tiles, 1, 1).node_costs[0] - mean) < 1e-15);
    CHECK(mean == 3.0);
}

TEST_CASE("cost_map is linear in mixtures") {
    RngStream rng(35);
    for (int trial = 0; trial < 50; ++trial) {
        int cells = 6;
        Vec a(cells * kNumTiles), b(cells * kNumTiles);
        for (int i = 0; i < a.size(); ++i) {
            a[i] = rng.uniform(0, 1);
            b[i] = rng.uniform(0, 1);
        }
        double alpha = rng.uniform(0, 1);
        Vec mix = alpha * a + (1 - alpha) * b;
        TerrainGrid gm = cost_map(mix, 2, 3);
        TerrainGrid ga = cost_map(a, 2, 3);
        TerrainGrid gb = cost_map(b, 2, 3);
        for (int i = 0; i < cells; ++i) {
            double expect = alpha * ga.node_costs[i] + (1 - alpha) * gb.node_costs[i];
            CHECK(std::abs(gm.node_costs[i] - expect) < 1e-12);
        }
    }
}

TEST_CASE("cost_map rejects out-of-range probabilities") {
    Vec tiles = Vec::Zero(kNumTiles);
    tiles[0] = 1.5;
    CHECK_THROWS_AS(cost_map(tiles, 1, 1), DomainError);
    tiles[0] = -0.1;
    CHECK_THROWS_AS(cost_map(tiles, 1, 1), DomainError);
}

TEST_CASE("cost_map_op backward distributes the table per cell") {
    Tape tape;
    Vec tiles = Vec::Constant(2 * kNumTiles, 1.0 / kNumTiles);
    TensorF t_tiles = tape.constant({2 * kNumTiles}, tiles);
    TensorF costs = cost_map_op(t_tiles, 1, 2);
    CHECK(costs.shape() == std::vector<int>{1, 2});
    TensorF loss = sum(costs);
    tape.backward(loss);
    for (int cell = 0; cell < 2; ++cell)
        for (int t = 0; t < kNumTiles; ++t)
            CHECK(t_tiles.grad()[cell * kNumTiles + t] == kTileCostTable[t]);
}
