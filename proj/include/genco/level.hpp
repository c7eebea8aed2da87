#ifndef GENCO_LEVEL_HPP
#define GENCO_LEVEL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "genco/tensor.hpp"

namespace genco {

// Tile classes, in storage order. The one-hot class axis and the text legend
// both use this order.
enum Tile : int {
    kWall = 0,
    kEmpty = 1,
    kKey = 2,
    kExit = 3,
    kEnemy1 = 4,
    kEnemy2 = 5,
    kEnemy3 = 6,
    kPlayer = 7,
};
inline constexpr int kNumTiles = 8;
inline constexpr char kTileChars[kNumTiles + 1] = "WEKXABCP";

struct ClassBounds {
    int min_count = 0;
    int max_count = 0;
};

// Hard constraints defining the feasible set: per-class count bounds, a
// combined bound on the three enemy classes, and 4-neighbor reachability
// player->key and key->exit through non-wall cells.
struct LevelSpec {
    int height = 0;
    int width = 0;
    std::array<ClassBounds, kNumTiles> bounds{};
    ClassBounds enemy_total{0, 3};
    bool require_connectivity = true;

    int cells() const { return height * width; }
    int vars() const { return height * width * kNumTiles; }

    // Default desk-scale bounds: exactly one player/key/exit, walls at most
    // 40% of cells, up to three enemies in total.
    static LevelSpec standard(int height, int width);

    // Throws InfeasibleError/ContractError when the bounds are malformed or
    // cannot be met on this grid.
    void validate() const;
};

// A committed tile assignment, one class per cell (row-major cells).
struct LevelSolution {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> tiles; // height*width entries, values 0..7

    int cells() const { return height * width; }

    // Flat one-hot tensor of length H*W*8 (cell-major, class minor).
    Vec one_hot() const;
    static LevelSolution from_one_hot(const Vec& x, int height, int width);

    // Compact byte key for hashing/uniqueness.
    std::string key() const;

    bool operator==(const LevelSolution& o) const {
        return height == o.height && width == o.width && tiles == o.tiles;
    }
};

// Real-valued score field over all decision variables, shape H x W x 8 flat.
struct ScoreField {
    int height = 0;
    int width = 0;
    Vec scores; // length H*W*8

    double at(int cell, int tile) const { return scores[cell * kNumTiles + tile]; }
};

// True iff x is one-hot per cell, meets every count bound, and (when the
// spec requires it) has non-wall 4-neighbor routes player->key and key->exit.
// Throws DimensionError when shapes disagree.
bool check_feasible(const Vec& assignment, const LevelSpec& spec);
bool check_feasible(const LevelSolution& x, const LevelSpec& spec);

// Render/parse one level as H lines of legend characters.
std::string render_level(const LevelSolution& x);
LevelSolution parse_level(const std::vector<std::string>& lines);

} // namespace genco

#endif // GENCO_LEVEL_HPP
