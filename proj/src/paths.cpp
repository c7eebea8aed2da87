#include "genco/paths.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace genco {

TerrainGrid TerrainGrid::corner_to_corner(int height, int width, Vec costs) {
    TerrainGrid t;
    t.height = height;
    t.width = width;
    t.node_costs = std::move(costs);
    t.src = 0;
    t.dst = height * width - 1;
    return t;
}

PathSolution shortest_path(const TerrainGrid& t) {
    int n = t.cells();
    if (t.height <= 0 || t.width <= 0 || t.node_costs.size() != n)
        throw DimensionError("shortest_path: bad grid dims");
    if (t.src < 0 || t.src >= n || t.dst < 0 || t.dst >= n)
        throw DimensionError("shortest_path: endpoint out of bounds");
    if (!t.node_costs.allFinite() || (t.node_costs.array() < 0.0).any())
        throw DomainError("shortest_path: node costs must be finite and non-negative");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<int> pred(n, -1);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> frontier;
    dist[t.src] = t.node_costs[t.src];
    frontier.emplace(dist[t.src], t.src);

    while (!frontier.empty()) {
        auto [d, cur] = frontier.top();
        frontier.pop();
        if (done[cur]) continue;
        done[cur] = 1;
        if (cur == t.dst) break;
        int r = cur / t.width, c = cur % t.width;
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            int nr = r + dr[k], nc = c + dc[k];
            if (nr < 0 || nr >= t.height || nc < 0 || nc >= t.width) continue;
            int nxt = nr * t.width + nc;
            if (done[nxt]) continue;
            double nd = d + t.node_costs[nxt];
            if (nd < dist[nxt]) {
                dist[nxt] = nd;
                pred[nxt] = cur;
                frontier.emplace(nd, nxt);
            }
        }
    }

    PathSolution p;
    p.height = t.height;
    p.width = t.width;
    p.indicator = Vec::Zero(n);
    for (int cur = t.dst;; cur = pred[cur]) {
        p.cells.push_back(cur);
        p.indicator[cur] = 1.0;
        if (cur == t.src) break;
    }
    std::reverse(p.cells.begin(), p.cells.end());
    p.total_cost = 0.0;
    for (int i = 0; i < n; ++i)
        if (p.indicator[i] == 1.0) p.total_cost += t.node_costs[i];
    return p;
}

bool valid_path(const PathSolution& p, const TerrainGrid& t) {
    if (p.height != t.height || p.width != t.width) return false;
    if (p.indicator.size() != t.cells()) return false;
    if (p.cells.empty()) return false;
    if (p.cells.front() != t.src || p.cells.back() != t.dst) return false;
    std::vector<char> seen(t.cells(), 0);
    int marked = 0;
    for (int i = 0; i < t.cells(); ++i) {
        if (p.indicator[i] != 0.0 && p.indicator[i] != 1.0) return false;
        if (p.indicator[i] == 1.0) ++marked;
    }
    if (marked != static_cast<int>(p.cells.size())) return false;
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
        int cur = p.cells[i];
        if (cur < 0 || cur >= t.cells()) return false;
        if (seen[cur]) return false; // simple path: no revisits
        seen[cur] = 1;
        if (p.indicator[cur] != 1.0) return false;
        if (i > 0) {
            int prev = p.cells[i - 1];
            int dr = std::abs(cur / t.width - prev / t.width);
            int dc = std::abs(cur % t.width - prev % t.width);
            if (dr + dc != 1) return false;
        }
    }
    double cost = 0.0;
    for (int i = 0; i < t.cells(); ++i)
        if (p.indicator[i] == 1.0) cost += t.node_costs[i];
    return cost == p.total_cost;
}

TerrainGrid cost_map(const Vec& tiles, int height, int width) {
    int n = height * width;
    if (tiles.size() != static_cast<Eigen::Index>(n) * kNumTiles)
        throw DimensionError("cost_map: tile tensor length mismatch");
    Vec costs(n);
    for (int cell = 0; cell < n; ++cell) {
        double acc = 0.0;
        for (int t = 0; t < kNumTiles; ++t) {
            double p = tiles[cell * kNumTiles + t];
            if (!(p >= 0.0 && p <= 1.0))
                throw DomainError("cost_map: probabilities must lie in [0,1]");
            acc += p * kTileCostTable[t];
        }
        costs[cell] = acc;
    }
    return TerrainGrid::corner_to_corner(height, width, std::move(costs));
}

TensorF cost_map_op(TensorF tiles, int height, int width) {
    TerrainGrid grid = cost_map(tiles.data(), height, width);
    Tape& tape = *tiles.tape();
    int src = tiles.id();
    int n = height * width;
    return tape.make({height, width}, std::move(grid.node_costs),
                     [src, n](Tape& tp, int self) {
        Vec& g_tiles = tp.grad(src);
        const Vec& g = tp.grad(self);
        for (int cell = 0; cell < n; ++cell)
            for (int t = 0; t < kNumTiles; ++t)
                g_tiles[cell * kNumTiles + t] += g[cell] * kTileCostTable[t];
    });
}

} // namespace genco
