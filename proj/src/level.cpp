#include "genco/level.hpp"

#include <algorithm>

namespace genco {

LevelSpec LevelSpec::standard(int height, int width) {
    LevelSpec spec;
    spec.height = height;
    spec.width = width;
    int n = height * width;
    spec.bounds[kWall] = {0, (n * 2) / 5};
    spec.bounds[kEmpty] = {0, n};
    spec.bounds[kKey] = {1, 1};
    spec.bounds[kExit] = {1, 1};
    spec.bounds[kEnemy1] = {0, 3};
    spec.bounds[kEnemy2] = {0, 3};
    spec.bounds[kEnemy3] = {0, 3};
    spec.bounds[kPlayer] = {1, 1};
    spec.enemy_total = {0, 3};
    return spec;
}

void LevelSpec::validate() const {
    if (height <= 0 || width <= 0) throw ContractError("LevelSpec: non-positive dims");
    for (int t = 0; t < kNumTiles; ++t) {
        if (bounds[t].min_count < 0 || bounds[t].max_count < bounds[t].min_count)
            throw InfeasibleError("LevelSpec: malformed count bounds");
    }
    for (int t : {kPlayer, kKey, kExit}) {
        if (bounds[t].min_count != 1 || bounds[t].max_count != 1)
            throw ContractError("LevelSpec: player/key/exit must have min=max=1");
    }
    if (enemy_total.min_count < 0 || enemy_total.max_count < enemy_total.min_count)
        throw InfeasibleError("LevelSpec: malformed enemy total bounds");

    int n = cells();
    long sum_min = 0;
    long sum_max = 0;
    long enemy_class_min = 0;
    long enemy_class_max = 0;
    for (int t = 0; t < kNumTiles; ++t) {
        bool enemy = (t == kEnemy1 || t == kEnemy2 || t == kEnemy3);
        if (enemy) {
            enemy_class_min += bounds[t].min_count;
            enemy_class_max += bounds[t].max_count;
        } else {
            sum_min += bounds[t].min_count;
            sum_max += bounds[t].max_count;
        }
    }
    sum_min += std::max(enemy_class_min, static_cast<long>(enemy_total.min_count));
    sum_max += std::min(enemy_class_max, static_cast<long>(enemy_total.max_count));
    if (enemy_class_max < enemy_total.min_count)
        throw InfeasibleError("LevelSpec: enemy class caps below enemy total minimum");
    if (sum_min > n || sum_max < n)
        throw InfeasibleError("LevelSpec: count bounds not satisfiable on this grid");
}

Vec LevelSolution::one_hot() const {
    Vec x = Vec::Zero(static_cast<Eigen::Index>(cells()) * kNumTiles);
    for (int c = 0; c < cells(); ++c) x[c * kNumTiles + tiles[c]] = 1.0;
    return x;
}

LevelSolution LevelSolution::from_one_hot(const Vec& x, int height, int width) {
    LevelSolution out;
    out.height = height;
    out.width = width;
    int n = height * width;
    if (x.size() != static_cast<Eigen::Index>(n) * kNumTiles)
        throw DimensionError("from_one_hot: length mismatch");
    out.tiles.resize(n);
    for (int c = 0; c < n; ++c) {
        int hit = -1;
        for (int t = 0; t < kNumTiles; ++t) {
            double v = x[c * kNumTiles + t];
            if (v == 1.0 && hit < 0) {
                hit = t;
            } else if (v != 0.0) {
                throw DomainError("from_one_hot: cell is not one-hot");
            }
        }
        if (hit < 0) throw DomainError("from_one_hot: cell is not one-hot");
        out.tiles[c] = static_cast<std::uint8_t>(hit);
    }
    return out;
}

std::string LevelSolution::key() const {
    std::string k;
    k.reserve(tiles.size());
    for (auto t : tiles) k.push_back(static_cast<char>('0' + t));
    return k;
}

namespace {

// Breadth-first reachability over non-wall cells, 4-neighbor adjacency.
bool reaches(const std::vector<std::uint8_t>& tiles, int height, int width, int from, int to) {
    if (from == to) return true;
    std::vector<std::uint8_t> seen(tiles.size(), 0);
    std::vector<int> queue;
    queue.reserve(tiles.size());
    queue.push_back(from);
    seen[from] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int cur = queue[head];
        int r = cur / width, c = cur % width;
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            int nr = r + dr[k], nc = c + dc[k];
            if (nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
            int nxt = nr * width + nc;
            if (seen[nxt] || tiles[nxt] == kWall) continue;
            if (nxt == to) return true;
            seen[nxt] = 1;
            queue.push_back(nxt);
        }
    }
    return false;
}

bool counts_ok(const std::vector<std::uint8_t>& tiles, const LevelSpec& spec) {
    std::array<int, kNumTiles> counts{};
    for (auto t : tiles) ++counts[t];
    for (int t = 0; t < kNumTiles; ++t) {
        if (counts[t] < spec.bounds[t].min_count || counts[t] > spec.bounds[t].max_count)
            return false;
    }
    int enemies = counts[kEnemy1] + counts[kEnemy2] + counts[kEnemy3];
    return enemies >= spec.enemy_total.min_count && enemies <= spec.enemy_total.max_count;
}

} // namespace

bool check_feasible(const LevelSolution& x, const LevelSpec& spec) {
    if (x.height != spec.height || x.width != spec.width)
        throw DimensionError("check_feasible: grid dims do not match spec");
    if (!counts_ok(x.tiles, spec)) return false;
    if (!spec.require_connectivity) return true;
    int player = -1, key = -1, exit_ = -1;
    for (int c = 0; c < x.cells(); ++c) {
        if (x.tiles[c] == kPlayer) player = c;
        if (x.tiles[c] == kKey) key = c;
        if (x.tiles[c] == kExit) exit_ = c;
    }
    return reaches(x.tiles, x.height, x.width, player, key) &&
           reaches(x.tiles, x.height, x.width, key, exit_);
}

bool check_feasible(const Vec& assignment, const LevelSpec& spec) {
    if (assignment.size() != spec.vars())
        throw DimensionError("check_feasible: assignment length does not match spec");
    LevelSolution x;
    x.height = spec.height;
    x.width = spec.width;
    x.tiles.resize(spec.cells());
    for (int c = 0; c < spec.cells(); ++c) {
        int hit = -1;
        for (int t = 0; t < kNumTiles; ++t) {
            double v = assignment[c * kNumTiles + t];
            if (v == 1.0 && hit < 0) {
                hit = t;
            } else if (v != 0.0) {
                return false; // not one-hot
            }
        }
        if (hit < 0) return false;
        x.tiles[c] = static_cast<std::uint8_t>(hit);
    }
    return check_feasible(x, spec);
}

std::string render_level(const LevelSolution& x) {
    std::string out;
    out.reserve(static_cast<std::size_t>(x.cells()) + x.height);
    for (int r = 0; r < x.height; ++r) {
        for (int c = 0; c < x.width; ++c) out.push_back(kTileChars[x.tiles[r * x.width + c]]);
        out.push_back('\n');
    }
    return out;
}

LevelSolution parse_level(const std::vector<std::string>& lines) {
    if (lines.empty()) throw IoError("parse_level: no lines");
    LevelSolution x;
    x.height = static_cast<int>(lines.size());
    x.width = static_cast<int>(lines[0].size());
    x.tiles.reserve(static_cast<std::size_t>(x.height) * x.width);
    for (const auto& line : lines) {
        if (static_cast<int>(line.size()) != x.width)
            throw IoError("parse_level: ragged grid");
        for (char ch : line) {
            const char* pos = std::char_traits<char>::find(kTileChars, kNumTiles, ch);
            if (!pos) throw IoError(std::string("parse_level: unknown tile char '") + ch + "'");
            x.tiles.push_back(static_cast<std::uint8_t>(pos - kTileChars));
        }
    }
    return x;
}

} // namespace genco
