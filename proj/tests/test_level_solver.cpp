#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <functional>

#include "genco/level_solver.hpp"
#include "genco/rng.hpp"

using namespace genco;

namespace {

// Second, independent feasibility implementation: recursive flood fill plus
// straight count loops. Kept deliberately separate from the library's BFS.
struct FloodOracle {
    static void flood(const std::vector<std::uint8_t>& tiles, int h, int w, int cell,
                      std::vector<char>& mark) {
        if (mark[cell] || tiles[cell] == kWall) return;
        mark[cell] = 1;
        int r = cell / w, c = cell % w;
        if (r > 0) flood(tiles, h, w, cell - w, mark);
        if (r + 1 < h) flood(tiles, h, w, cell + w, mark);
        if (c > 0) flood(tiles, h, w, cell - 1, mark);
        if (c + 1 < w) flood(tiles, h, w, cell + 1, mark);
    }

    static bool feasible(const LevelSolution& x, const LevelSpec& spec) {
        std::array<int, kNumTiles> counts{};
        for (auto t : x.tiles) ++counts[t];
        for (int t = 0; t < kNumTiles; ++t)
            if (counts[t] < spec.bounds[t].min_count || counts[t] > spec.bounds[t].max_count)
                return false;
        int enemies = counts[kEnemy1] + counts[kEnemy2] + counts[kEnemy3];
        if (enemies < spec.enemy_total.min_count || enemies > spec.enemy_total.max_count)
            return false;
        if (!spec.require_connectivity) return true;
        int p = -1, k = -1, e = -1;
        for (int i = 0; i < x.cells(); ++i) {
            if (x.tiles[i] == kPlayer) p = i;
            if (x.tiles[i] == kKey) k = i;
            if (x.tiles[i] == kExit) e = i;
        }
        std::vector<char> from_p(x.cells(), 0), from_k(x.cells(), 0);
        flood(x.tiles, x.height, x.width, p, from_p);
        if (!from_p[k]) return false;
        flood(x.tiles, x.height, x.width, k, from_k);
        return from_k[e] != 0;
    }
};

LevelSolution from_rows(const std::vector<std::string>& rows) { return parse_level(rows); }

ScoreField random_scores(const LevelSpec& spec, RngStream& rng, double lo = -1, double hi = 1) {
    ScoreField f;
    f.height = spec.height;
    f.width = spec.width;
    f.scores = Vec(spec.vars());
    for (int i = 0; i < spec.vars(); ++i) f.scores[i] = rng.uniform(lo, hi);
    return f;
}

ScoreField encode_level(const LevelSolution& x, double on = 10.0, double off = -10.0) {
    ScoreField f;
    f.height = x.height;
    f.width = x.width;
    f.scores = Vec::Constant(static_cast<Eigen::Index>(x.cells()) * kNumTiles, off);
    for (int c = 0; c < x.cells(); ++c) f.scores[c * kNumTiles + x.tiles[c]] = on;
    return f;
}

} // namespace

TEST_CASE("check_feasible: adjacent player-key-exit row is playable") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    auto lvl = from_rows({"PKX", "EEE", "EEE"});
    CHECK(check_feasible(lvl, spec));
}

TEST_CASE("check_feasible: full wall column blocks the key") {
    LevelSpec spec = LevelSpec::standard(3, 4);
    // wall column separates player (left) from key/exit (right)
    auto lvl = from_rows({"PWKX", "EWEE", "EWEE"});
    // wall count 3 <= 40% of 12 = 4
    CHECK_FALSE(check_feasible(lvl, spec));
}

TEST_CASE("check_feasible rejects wrong shapes and non-one-hot tensors") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    CHECK_THROWS_AS(check_feasible(Vec::Zero(5), spec), DimensionError);
    Vec two_hot = Vec::Zero(spec.vars());
    two_hot[0] = 1.0;
    two_hot[1] = 1.0; // cell 0 has two classes
    CHECK_FALSE(check_feasible(two_hot, spec));
    Vec soft = Vec::Zero(spec.vars());
    for (int c = 0; c < 9; ++c) soft[c * kNumTiles] = 0.5;
    CHECK_FALSE(check_feasible(soft, spec));
}

TEST_CASE("check_feasible agrees with an independent flood-fill oracle on 500 random grids") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(2024);
    int feasible_seen = 0;
    for (int trial = 0; trial < 500; ++trial) {
        LevelSolution x;
        x.height = 3;
        x.width = 3;
        x.tiles.resize(9);
        for (int i = 0; i < 9; ++i) x.tiles[i] = static_cast<std::uint8_t>(rng.below(kNumTiles));
        bool lib = check_feasible(x, spec);
        bool oracle = FloodOracle::feasible(x, spec);
        CHECK(lib == oracle);
        feasible_seen += lib ? 1 : 0;
    }
    CHECK(feasible_seen > 0); // the sample hit both branches
}

TEST_CASE("project_level recovers a strongly encoded level") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    auto lvl = from_rows({"PEK", "WEW", "EEX"});
    REQUIRE(check_feasible(lvl, spec));
    LevelSolution got = project_level(encode_level(lvl), spec);
    CHECK(got == lvl);
}

TEST_CASE("project_level on all-zero scores returns the lexicographically smallest level") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    ScoreField zeros{3, 3, Vec::Zero(spec.vars())};
    LevelSolution got = project_level(zeros, spec);
    // smallest assignment sequence: three walls first (cap 3), empties, then
    // the forced singletons in ascending class order
    CHECK(render_level(got) == "WWW\nEEE\nKXP\n");
    CHECK(got == brute_force_project(zeros, spec));
}

TEST_CASE("project_level matches brute force objective on random 3x3 fields") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        ScoreField f = random_scores(spec, rng);
        LevelSolution a = project_level(f, spec);
        LevelSolution b = brute_force_project(f, spec);
        CHECK(level_objective(f, a) == level_objective(f, b));
        CHECK(a == b); // identical tie-break rules
    }
}

TEST_CASE("project_level matches brute force on smaller grids too") {
    RngStream rng(8);
    for (auto [h, w] : {std::pair{1, 3}, {2, 2}, {2, 3}, {2, 4}, {3, 2}}) {
        LevelSpec spec = LevelSpec::standard(h, w);
        for (int trial = 0; trial < 40; ++trial) {
            ScoreField f = random_scores(spec, rng);
            LevelSolution a = project_level(f, spec);
            LevelSolution b = brute_force_project(f, spec);
            CHECK(level_objective(f, a) == level_objective(f, b));
        }
    }
}

TEST_CASE("feasibility closure: every projection is feasible") {
    LevelSpec spec = LevelSpec::standard(5, 5);
    RngStream rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        ScoreField f = random_scores(spec, rng, -2, 2);
        LevelSolution x = project_level(f, spec);
        CHECK(check_feasible(x, spec));
    }
}

TEST_CASE("argmax is invariant to boosting the chosen coordinates") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        ScoreField f = random_scores(spec, rng);
        LevelSolution x = project_level(f, spec);
        ScoreField g = f;
        for (int c = 0; c < x.cells(); ++c) g.scores[c * kNumTiles + x.tiles[c]] += 1.0;
        CHECK(project_level(g, spec) == x);
    }
}

TEST_CASE("non-finite scores are a domain error") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    ScoreField f{3, 3, Vec::Zero(spec.vars())};
    f.scores[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(project_level(f, spec), DomainError);
}

TEST_CASE("exhausted node budget raises a solver-budget error") {
    LevelSpec spec = LevelSpec::standard(4, 4);
    RngStream rng(11);
    ScoreField f = random_scores(spec, rng);
    CHECK_THROWS_AS(project_level(f, spec, 5), SolverBudgetError);
}

TEST_CASE("brute force: unique feasible level is returned regardless of scores") {
    // 1x3 grid: singletons fill the row; the only feasible levels are the six
    // permutations, and bounds force exactly those. Make two classes
    // lexicographically forced by zero scores: smallest assignment is K X P.
    LevelSpec spec = LevelSpec::standard(1, 3);
    ScoreField zeros{1, 3, Vec::Zero(spec.vars())};
    LevelSolution got = brute_force_project(zeros, spec);
    CHECK(render_level(got) == "KXP\n");
}

TEST_CASE("brute force: infeasible spec raises infeasibility") {
    LevelSpec spec = LevelSpec::standard(2, 2);
    spec.bounds[kWall].min_count = 3; // leaves no room for the three singletons
    spec.bounds[kWall].max_count = 3;
    ScoreField zeros{2, 2, Vec::Zero(spec.vars())};
    CHECK_THROWS_AS(brute_force_project(zeros, spec), InfeasibleError);
    CHECK_THROWS_AS(project_level(zeros, spec), InfeasibleError);
}

TEST_CASE("brute force: grids beyond 9 cells are a bound error") {
    LevelSpec spec = LevelSpec::standard(4, 3);
    ScoreField zeros{4, 3, Vec::Zero(spec.vars())};
    CHECK_THROWS_AS(brute_force_project(zeros, spec), BoundError);
}

TEST_CASE("connectivity flag off widens the feasible set") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    spec.require_connectivity = false;
    auto blocked = from_rows({"PWK", "EWE", "EWX"});
    // 3 walls separate player from key; still fine without connectivity
    CHECK(check_feasible(blocked, spec));
    LevelSpec strict = LevelSpec::standard(3, 3);
    CHECK_FALSE(check_feasible(blocked, strict));
}
