#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "genco/diff_layer.hpp"
#include "genco/rng.hpp"

using namespace genco;

namespace {

ScoreField encode(const LevelSolution& x, double on = 10.0, double off = -10.0) {
    ScoreField f{x.height, x.width,
                 Vec::Constant(static_cast<Eigen::Index>(x.cells()) * kNumTiles, off)};
    for (int c = 0; c < x.cells(); ++c) f.scores[c * kNumTiles + x.tiles[c]] = on;
    return f;
}

Vec random_vec(int n, RngStream& rng, double lo, double hi) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

} // namespace

TEST_CASE("layer_forward returns the exact projection of a strong encoding") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    LevelSolution lvl = parse_level({"PEK", "EEE", "EEX"});
    REQUIRE(check_feasible(lvl, spec));
    SolverLayerConfig cfg{DiffMethod::blackbox, 10.0, false};
    auto [x, rec] = layer_forward(encode(lvl).scores, cfg, LevelProblem{spec});
    CHECK(x == lvl.one_hot());
    CHECK(rec.x == x);
}

TEST_CASE("layer_forward on a 1x1 path problem yields the single-cell indicator") {
    SolverLayerConfig cfg{DiffMethod::identity, 20.0, false};
    auto [x, rec] = layer_forward(Vec::Constant(1, 3.5), cfg, PathProblem{1, 1, 0, 0});
    CHECK(x.size() == 1);
    CHECK(x[0] == 1.0);
}

TEST_CASE("layer outputs always satisfy the problem invariants") {
    LevelSpec spec = LevelSpec::standard(4, 4);
    RngStream rng(51);
    SolverLayerConfig cfg{DiffMethod::blackbox, 10.0, false};
    for (int trial = 0; trial < 20; ++trial) {
        Vec c = random_vec(spec.vars(), rng, -1, 1);
        auto [x, rec] = layer_forward(c, cfg, LevelProblem{spec});
        CHECK(check_feasible(x, spec));
    }
    for (int trial = 0; trial < 20; ++trial) {
        Vec c = random_vec(12, rng, 0, 4);
        auto [x, rec] = layer_forward(c, cfg, PathProblem::corner_to_corner(3, 4));
        TerrainGrid grid{3, 4, c, 0, 11};
        PathSolution p = shortest_path(grid);
        CHECK(x == p.indicator);
    }
}

TEST_CASE("blackbox gradient is exactly zero when nothing flips") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    LevelSolution lvl = parse_level({"PEK", "EEE", "EEX"});
    SolverLayerConfig cfg{DiffMethod::blackbox, 10.0, false};
    auto [x, rec] = layer_forward(encode(lvl).scores, cfg, LevelProblem{spec});
    Vec g = blackbox_backward(rec, Vec::Zero(x.size()), 10.0);
    CHECK(g == Vec::Zero(x.size()));
    // tiny loss gradients cannot flip a strongly separated argmax either
    Vec tiny = Vec::Constant(x.size(), 1e-9);
    CHECK(blackbox_backward(rec, tiny, 10.0) == Vec::Zero(x.size()));
}

TEST_CASE("two-level construction: blackbox gradient is -(L' - L)/lambda") {
    // 1x3 grid: the feasible set is exactly the 6 permutations of K, X, P.
    LevelSpec spec = LevelSpec::standard(1, 3);
    LevelSolution L = parse_level({"KXP"});
    LevelSolution Lp = parse_level({"PKX"});
    REQUIRE(check_feasible(L, spec));
    REQUIRE(check_feasible(Lp, spec));

    ScoreField c = encode(L, 1.0, 0.0); // L wins by margin 1 per differing cell
    SolverLayerConfig cfg{DiffMethod::blackbox, 1000.0, false};
    auto [x, rec] = layer_forward(c.scores, cfg, LevelProblem{spec});
    REQUIRE(x == L.one_hot());

    // loss prefers L': d(loss)/dx = -onehot(L')
    Vec g_x = -Lp.one_hot();
    double lambda = 1000.0;
    Vec grad = blackbox_backward(rec, g_x, lambda);
    Vec expect = -(Lp.one_hot() - L.one_hot()) / lambda;
    CHECK(grad == expect);
    for (int i = 0; i < grad.size(); ++i) {
        bool differs = Lp.one_hot()[i] != L.one_hot()[i];
        CHECK((grad[i] != 0.0) == differs);
    }
}

TEST_CASE("blackbox gradient entries live on the binary difference lattice") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(52);
    double lambda = 5.0;
    SolverLayerConfig cfg{DiffMethod::blackbox, lambda, false};
    for (int trial = 0; trial < 20; ++trial) {
        Vec c = random_vec(spec.vars(), rng, -1, 1);
        auto [x, rec] = layer_forward(c, cfg, LevelProblem{spec});
        Vec g_x = random_vec(spec.vars(), rng, -1, 1);
        Vec grad = blackbox_backward(rec, g_x, lambda);
        for (int i = 0; i < grad.size(); ++i) {
            bool ok = grad[i] == 0.0 || grad[i] == 1.0 / lambda || grad[i] == -1.0 / lambda;
            CHECK(ok);
        }
    }
}

TEST_CASE("one blackbox descent step moves the argmax to the preferred level") {
    LevelSpec spec = LevelSpec::standard(1, 3);
    LevelSolution L = parse_level({"KXP"});
    LevelSolution Lp = parse_level({"XPK"});
    ScoreField c = encode(L, 1.0, 0.0);
    double lambda = 100.0;
    SolverLayerConfig cfg{DiffMethod::blackbox, lambda, false};
    auto [x, rec] = layer_forward(c.scores, cfg, LevelProblem{spec});
    REQUIRE(x == L.one_hot());

    Vec g_x = -Lp.one_hot();
    Vec grad = blackbox_backward(rec, g_x, lambda);
    REQUIRE(grad != Vec::Zero(grad.size())); // lambda large enough to flip

    double eta = 3.0 * lambda; // enough to clear the margin of 1 per cell
    ScoreField moved{1, 3, c.scores - eta * grad};
    CHECK(project_level(moved, spec) == Lp);
}

TEST_CASE("identity backward passes gradients through unchanged") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(53);
    Vec c = random_vec(spec.vars(), rng, -1, 1);
    SolverLayerConfig cfg{DiffMethod::identity, 20.0, false};
    auto [x, rec] = layer_forward(c, cfg, LevelProblem{spec});
    Vec g_x = random_vec(spec.vars(), rng, -2, 2);
    CHECK(identity_backward(rec, g_x, false) == g_x);
}

TEST_CASE("identity with projection removes the per-cell class mean") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(54);
    Vec c = random_vec(spec.vars(), rng, -1, 1);
    SolverLayerConfig cfg{DiffMethod::identity, 20.0, true};
    auto [x, rec] = layer_forward(c, cfg, LevelProblem{spec});

    // constant across classes at a cell -> zeros there
    Vec g_const = Vec::Zero(spec.vars());
    for (int t = 0; t < kNumTiles; ++t) g_const[0 * kNumTiles + t] = 0.7;
    Vec out = identity_backward(rec, g_const, true);
    for (int t = 0; t < kNumTiles; ++t) CHECK(out[t] == 0.0);

    // random gradients: per-cell class sums vanish
    for (int trial = 0; trial < 20; ++trial) {
        Vec g = random_vec(spec.vars(), rng, -3, 3);
        Vec p = identity_backward(rec, g, true);
        for (int cell = 0; cell < spec.cells(); ++cell) {
            double s = 0.0;
            for (int t = 0; t < kNumTiles; ++t) s += p[cell * kNumTiles + t];
            CHECK(std::abs(s) < 1e-12);
        }
    }
}

TEST_CASE("projection flag is a no-op for path problems (no class axis)") {
    RngStream rng(55);
    Vec c = random_vec(9, rng, 0, 3);
    SolverLayerConfig cfg{DiffMethod::identity, 20.0, true};
    auto [x, rec] = layer_forward(c, cfg, PathProblem::corner_to_corner(3, 3));
    Vec g_x = random_vec(9, rng, -1, 1);
    CHECK(identity_backward(rec, g_x, true) == g_x);
}

TEST_CASE("budget exhaustion in the perturbed solve yields a zero gradient") {
    LevelSpec spec = LevelSpec::standard(4, 4);
    RngStream rng(56);
    Vec c = random_vec(spec.vars(), rng, -1, 1);
    SolverLayerConfig cfg{DiffMethod::blackbox, 10.0, false};
    auto [x, rec] = layer_forward(c, cfg, LevelProblem{spec});
    rec.problem = LevelProblem{spec, 3}; // starve only the inner solve
    Vec g_x = random_vec(spec.vars(), rng, -1, 1);
    CHECK(blackbox_backward(rec, g_x, 10.0) == Vec::Zero(spec.vars()));
}

TEST_CASE("solver_layer forward is bit-identical to calling the solver directly") {
    LevelSpec spec = LevelSpec::standard(3, 3);
    RngStream rng(57);
    Vec c = random_vec(spec.vars(), rng, -1, 1);
    Tape tape;
    TensorF ct = tape.constant({spec.vars()}, c);
    SolverLayerConfig cfg{DiffMethod::blackbox, 10.0, false};
    TensorF x = solver_layer(ct, cfg, LevelProblem{spec});
    ScoreField f{3, 3, c};
    CHECK(x.data() == project_level(f, spec).one_hot());
}

TEST_CASE("solver_layer backward dispatches per configured method") {
    LevelSpec spec = LevelSpec::standard(1, 3);
    LevelSolution L = parse_level({"KXP"});
    Vec c = encode(L, 1.0, 0.0).scores;

    // identity: gradient of sum(x) w.r.t. c is all ones
    {
        Tape tape;
        TensorF ct = tape.constant({spec.vars()}, c);
        TensorF x = solver_layer(ct, SolverLayerConfig{DiffMethod::identity, 20.0, false},
                                 LevelProblem{spec});
        tape.backward(sum(x));
        CHECK(ct.grad() == Vec::Ones(spec.vars()));
    }
    // blackbox with a loss gradient too small to flip: zero gradient
    {
        Tape tape;
        TensorF ct = tape.constant({spec.vars()}, c);
        TensorF x = solver_layer(ct, SolverLayerConfig{DiffMethod::blackbox, 0.001, false},
                                 LevelProblem{spec});
        tape.backward(sum(x));
        CHECK(ct.grad() == Vec::Zero(spec.vars()));
    }
}

TEST_CASE("solver layer config validation") {
    SolverLayerConfig bad{DiffMethod::blackbox, 0.0, false};
    CHECK_THROWS_AS(bad.validate(), ContractError);
    SolverLayerConfig ok{DiffMethod::identity, 0.0, false}; // lambda unused
    CHECK_NOTHROW(ok.validate());
}
