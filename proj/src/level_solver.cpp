#include "genco/level_solver.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace genco {

namespace {

constexpr std::uint8_t kUnassigned = 255;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Absolute slack protecting the reconstruction pass from last-ulp rounding
// of bound sums; scores are desk-scale so an absolute epsilon suffices.
constexpr double kBoundSlack = 1e-9;

bool is_enemy(int t) { return t == kEnemy1 || t == kEnemy2 || t == kEnemy3; }

// Shared count bookkeeping for the search and the brute-force enumerator.
struct CountState {
    std::array<int, kNumTiles> counts{};
    int enemy_count = 0;

    void add(int t) {
        ++counts[t];
        if (is_enemy(t)) ++enemy_count;
    }
    void remove(int t) {
        --counts[t];
        if (is_enemy(t)) --enemy_count;
    }

    bool may_take(int t, const LevelSpec& spec) const {
        if (counts[t] >= spec.bounds[t].max_count) return false;
        if (is_enemy(t) && enemy_count >= spec.enemy_total.max_count) return false;
        return true;
    }

    // Can some completion of `remaining` cells still satisfy every minimum
    // and give each cell a class?
    bool completable(int remaining, const LevelSpec& spec) const {
        long needed_other = 0, needed_enemy = 0;
        long cap_other = 0, cap_enemy = 0;
        for (int t = 0; t < kNumTiles; ++t) {
            long deficit = std::max(0, spec.bounds[t].min_count - counts[t]);
            long room = spec.bounds[t].max_count - counts[t];
            if (is_enemy(t)) {
                needed_enemy += deficit;
                cap_enemy += room;
            } else {
                needed_other += deficit;
                cap_other += room;
            }
        }
        long enemy_deficit =
            std::max(needed_enemy,
                     static_cast<long>(std::max(0, spec.enemy_total.min_count - enemy_count)));
        long enemy_room =
            std::min(cap_enemy, static_cast<long>(spec.enemy_total.max_count - enemy_count));
        return needed_other + enemy_deficit <= remaining &&
               cap_other + enemy_room >= remaining;
    }

    bool minima_met(const LevelSpec& spec) const {
        for (int t = 0; t < kNumTiles; ++t)
            if (counts[t] < spec.bounds[t].min_count) return false;
        return enemy_count >= spec.enemy_total.min_count;
    }
};

// Reachability over a partial assignment; unassigned cells count as
// passable, so a failure rules out every completion of the prefix.
class ReachScratch {
public:
    explicit ReachScratch(int n) : stamp_(n, 0), queue_(n) {}

    bool connected(const std::vector<std::uint8_t>& occ, int height, int width, int from,
                   int to) {
        if (from == to) return true;
        ++gen_;
        int head = 0, tail = 0;
        queue_[tail++] = from;
        stamp_[from] = gen_;
        while (head < tail) {
            int cur = queue_[head++];
            int r = cur / width, c = cur % width;
            const int dr[4] = {-1, 1, 0, 0};
            const int dc[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                int nr = r + dr[k], nc = c + dc[k];
                if (nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
                int nxt = nr * width + nc;
                if (stamp_[nxt] == gen_ || occ[nxt] == kWall) continue;
                if (nxt == to) return true;
                stamp_[nxt] = gen_;
                queue_[tail++] = nxt;
            }
        }
        return false;
    }

private:
    std::vector<std::uint32_t> stamp_;
    std::vector<int> queue_;
    std::uint32_t gen_ = 0;
};

// Greedy feasible construction seeding the incumbent: all cells empty,
// singletons at their best cells, then enemy/wall upgrades that keep the
// level feasible.
std::optional<LevelSolution> greedy_incumbent(const ScoreField& c, const LevelSpec& spec) {
    int n = spec.cells();
    std::vector<std::uint8_t> tiles(n, kEmpty);
    std::vector<char> locked(n, 0);

    for (int cls : {kPlayer, kKey, kExit}) {
        int best_cell = -1;
        double best_delta = kNegInf;
        for (int i = 0; i < n; ++i) {
            if (locked[i]) continue;
            double d = c.at(i, cls) - c.at(i, kEmpty);
            if (d > best_delta) {
                best_delta = d;
                best_cell = i;
            }
        }
        if (best_cell < 0) return std::nullopt;
        tiles[best_cell] = static_cast<std::uint8_t>(cls);
        locked[best_cell] = 1;
    }

    CountState st;
    for (auto t : tiles) st.add(t);

    struct Cand {
        double delta;
        int cell;
        int cls;
    };
    auto by_gain = [](const Cand& a, const Cand& b) {
        if (a.delta != b.delta) return a.delta > b.delta;
        if (a.cell != b.cell) return a.cell < b.cell;
        return a.cls < b.cls;
    };

    std::vector<Cand> enemy_cands;
    for (int i = 0; i < n; ++i) {
        if (locked[i]) continue;
        for (int cls : {kEnemy1, kEnemy2, kEnemy3})
            enemy_cands.push_back({c.at(i, cls) - c.at(i, kEmpty), i, cls});
    }
    std::sort(enemy_cands.begin(), enemy_cands.end(), by_gain);
    for (const auto& cand : enemy_cands) {
        if (locked[cand.cell]) continue;
        if (!st.may_take(cand.cls, spec)) continue;
        bool forced = st.counts[cand.cls] < spec.bounds[cand.cls].min_count ||
                      st.enemy_count < spec.enemy_total.min_count;
        if (forced || cand.delta > 0) {
            tiles[cand.cell] = static_cast<std::uint8_t>(cand.cls);
            locked[cand.cell] = 1;
            st.remove(kEmpty);
            st.add(cand.cls);
        }
    }

    ReachScratch reach(n);
    int player = -1, key = -1, exit_ = -1;
    for (int i = 0; i < n; ++i) {
        if (tiles[i] == kPlayer) player = i;
        if (tiles[i] == kKey) key = i;
        if (tiles[i] == kExit) exit_ = i;
    }
    std::vector<Cand> wall_cands;
    for (int i = 0; i < n; ++i)
        if (!locked[i]) wall_cands.push_back({c.at(i, kWall) - c.at(i, kEmpty), i, kWall});
    std::sort(wall_cands.begin(), wall_cands.end(), by_gain);
    for (const auto& cand : wall_cands) {
        if (!st.may_take(kWall, spec)) break;
        bool forced = st.counts[kWall] < spec.bounds[kWall].min_count;
        if (!forced && cand.delta <= 0) continue;
        tiles[cand.cell] = kWall;
        bool ok = !spec.require_connectivity ||
                  (reach.connected(tiles, spec.height, spec.width, player, key) &&
                   reach.connected(tiles, spec.height, spec.width, key, exit_));
        if (ok) {
            locked[cand.cell] = 1;
            st.remove(kEmpty);
            st.add(kWall);
        } else {
            tiles[cand.cell] = kEmpty;
        }
    }

    LevelSolution sol;
    sol.height = spec.height;
    sol.width = spec.width;
    sol.tiles = std::move(tiles);
    if (!check_feasible(sol, spec)) return std::nullopt;
    return sol;
}

// Branch-and-bound core, parameterized by a static cell visit order and a
// per-cell class order. Two modes:
//   optimize:    find the optimal objective value (any optimal assignment);
//   reconstruct: row-major order, ascending classes, fixed target value;
//                stops at the first leaf reaching the target, which is the
//                lexicographically smallest optimal assignment.
class LevelSearch {
public:
    enum class Mode { optimize, reconstruct };

    LevelSearch(const ScoreField& c, const LevelSpec& spec, Mode mode, long& nodes, long budget)
        : c_(c), spec_(spec), mode_(mode), n_(spec.cells()), nodes_(nodes), budget_(budget),
          occ_(n_, kUnassigned), reach_(n_) {
        cell_order_.resize(n_);
        for (int i = 0; i < n_; ++i) cell_order_[i] = i;
        if (mode_ == Mode::optimize) {
            // Contested cells first: the gap between a cell's best class and
            // its empty score measures how much it competes for the caps.
            std::vector<double> contest(n_);
            for (int i = 0; i < n_; ++i) {
                double m = c_.at(i, 0);
                for (int t = 1; t < kNumTiles; ++t) m = std::max(m, c_.at(i, t));
                contest[i] = m - c_.at(i, kEmpty);
            }
            std::stable_sort(cell_order_.begin(), cell_order_.end(),
                             [&](int a, int b) { return contest[a] > contest[b]; });
        }

        class_order_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            auto& ord = class_order_[i];
            for (int t = 0; t < kNumTiles; ++t) ord[t] = static_cast<std::uint8_t>(t);
            if (mode_ == Mode::optimize) {
                std::stable_sort(ord.begin(), ord.end(), [&](std::uint8_t a, std::uint8_t b) {
                    return c_.at(i, a) > c_.at(i, b);
                });
            }
        }

        suffix_max_.assign(n_ + 1, 0.0);
        suffix_empty_.assign(n_ + 1, 0.0);
        suffix_single_.fill({});
        for (int s : {kPlayer, kKey, kExit}) suffix_single_[s].assign(n_ + 1, kNegInf);
        for (int p = n_ - 1; p >= 0; --p) {
            int cell = cell_order_[p];
            double m = c_.at(cell, 0);
            for (int t = 1; t < kNumTiles; ++t) m = std::max(m, c_.at(cell, t));
            suffix_max_[p] = suffix_max_[p + 1] + m;
            suffix_empty_[p] = suffix_empty_[p + 1] + c_.at(cell, kEmpty);
            for (int s : {kPlayer, kKey, kExit})
                suffix_single_[s][p] = std::max(suffix_single_[s][p + 1],
                                                c_.at(cell, s) - c_.at(cell, kEmpty));
        }

        // Positive-gain lists over the visit order for the two capacity
        // groups; enemies are merged by their per-cell best class.
        for (int p = 0; p < n_; ++p) {
            int cell = cell_order_[p];
            double wall_gain = c_.at(cell, kWall) - c_.at(cell, kEmpty);
            if (wall_gain > 0) wall_gains_.push_back({wall_gain, p});
            double eg = std::max({c_.at(cell, kEnemy1), c_.at(cell, kEnemy2),
                                  c_.at(cell, kEnemy3)}) -
                        c_.at(cell, kEmpty);
            if (eg > 0) enemy_gains_.push_back({eg, p});
        }
        auto desc = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
            return a.first > b.first;
        };
        std::sort(wall_gains_.begin(), wall_gains_.end(), desc);
        std::sort(enemy_gains_.begin(), enemy_gains_.end(), desc);
    }

    // mode == optimize
    bool optimize(double seed_value, const std::vector<std::uint8_t>* seed_tiles) {
        best_ = seed_value;
        if (seed_tiles) {
            best_tiles_ = *seed_tiles;
            have_incumbent_ = true;
        }
        dfs_optimize(0, 0.0);
        return have_incumbent_;
    }

    // mode == reconstruct; returns the first (lex-smallest) assignment whose
    // canonical score reaches `target`.
    bool reconstruct(double target) {
        target_ = target;
        return dfs_reconstruct(0, 0.0);
    }

    double best_value() const { return best_; }
    const std::vector<std::uint8_t>& best_tiles() const { return best_tiles_; }
    // Valid after a successful reconstruct(): the full assignment is kept.
    const std::vector<std::uint8_t>& assignment() const { return occ_; }

private:
    double canonical_score() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += c_.at(i, occ_[i]);
        return s;
    }

    void charge_node() {
        if (++nodes_ > budget_)
            throw SolverBudgetError("project_level: node budget exhausted");
    }

    // Admissible bound over unassigned cells (positions >= p): every cell is
    // paid its empty score; wall/enemy groups add at most their best
    // remaining positive gains within the caps; unplaced singletons add the
    // best remaining gain (which may be negative: they are forced).
    double capped_bound(int p, double partial) const {
        int remaining = n_ - p;
        if (spec_.bounds[kEmpty].max_count - st_.counts[kEmpty] < remaining)
            return partial + suffix_max_[p]; // empty filler capped: plain bound
        double b = partial + suffix_empty_[p];
        int wall_room = spec_.bounds[kWall].max_count - st_.counts[kWall];
        int taken = 0;
        for (const auto& [gain, pos] : wall_gains_) {
            if (taken >= wall_room) break;
            if (pos >= p) {
                b += gain;
                ++taken;
            }
        }
        int class_room = 0;
        for (int t : {kEnemy1, kEnemy2, kEnemy3})
            class_room += spec_.bounds[t].max_count - st_.counts[t];
        int enemy_room = std::min(spec_.enemy_total.max_count - st_.enemy_count, class_room);
        taken = 0;
        for (const auto& [gain, pos] : enemy_gains_) {
            if (taken >= enemy_room) break;
            if (pos >= p) {
                b += gain;
                ++taken;
            }
        }
        if (pos_player_ < 0) b += suffix_single_[kPlayer][p];
        if (pos_key_ < 0) b += suffix_single_[kKey][p];
        if (pos_exit_ < 0) b += suffix_single_[kExit][p];
        return b;
    }

    void place(int cell, int t) {
        st_.add(t);
        occ_[cell] = static_cast<std::uint8_t>(t);
        if (t == kPlayer) pos_player_ = cell;
        if (t == kKey) pos_key_ = cell;
        if (t == kExit) pos_exit_ = cell;
    }

    void unplace(int cell, int t) {
        st_.remove(t);
        occ_[cell] = kUnassigned;
        if (t == kPlayer) pos_player_ = -1;
        if (t == kKey) pos_key_ = -1;
        if (t == kExit) pos_exit_ = -1;
    }

    bool optimistic_routes_open(int t) {
        if (!spec_.require_connectivity) return true;
        if (t != kWall && t != kPlayer && t != kKey && t != kExit) return true;
        if (pos_player_ >= 0 && pos_key_ >= 0 &&
            !reach_.connected(occ_, spec_.height, spec_.width, pos_player_, pos_key_))
            return false;
        if (pos_key_ >= 0 && pos_exit_ >= 0 &&
            !reach_.connected(occ_, spec_.height, spec_.width, pos_key_, pos_exit_))
            return false;
        return true;
    }

    bool leaf_feasible() {
        if (!st_.minima_met(spec_)) return false;
        if (!spec_.require_connectivity) return true;
        return reach_.connected(occ_, spec_.height, spec_.width, pos_player_, pos_key_) &&
               reach_.connected(occ_, spec_.height, spec_.width, pos_key_, pos_exit_);
    }

    void dfs_optimize(int p, double partial) {
        if (p == n_) {
            if (!leaf_feasible()) return;
            double score = canonical_score();
            if (!have_incumbent_ || score > best_) {
                best_ = score;
                best_tiles_.assign(occ_.begin(), occ_.end());
                have_incumbent_ = true;
            }
            return;
        }
        int cell = cell_order_[p];
        for (int idx = 0; idx < kNumTiles; ++idx) {
            int t = class_order_[cell][idx];
            charge_node();
            if (!st_.may_take(t, spec_)) continue;
            double sc = partial + c_.at(cell, t);
            if (have_incumbent_ && sc + suffix_max_[p + 1] <= best_)
                break; // classes sorted by score: everything after is worse
            place(cell, t);
            bool open = st_.completable(n_ - p - 1, spec_) && optimistic_routes_open(t);
            if (open && have_incumbent_ && capped_bound(p + 1, sc) <= best_) open = false;
            if (open) dfs_optimize(p + 1, sc);
            unplace(cell, t);
        }
    }

    bool dfs_reconstruct(int p, double partial) {
        if (p == n_) {
            return leaf_feasible() && canonical_score() >= target_;
        }
        int cell = cell_order_[p]; // row-major in reconstruct mode
        for (int idx = 0; idx < kNumTiles; ++idx) {
            int t = class_order_[cell][idx];
            charge_node();
            if (!st_.may_take(t, spec_)) continue;
            double sc = partial + c_.at(cell, t);
            if (sc + suffix_max_[p + 1] < target_ - kBoundSlack) continue;
            place(cell, t);
            bool open = st_.completable(n_ - p - 1, spec_) && optimistic_routes_open(t) &&
                        capped_bound(p + 1, sc) >= target_ - kBoundSlack;
            if (open && dfs_reconstruct(p + 1, sc)) return true;
            unplace(cell, t);
        }
        return false;
    }

    const ScoreField& c_;
    const LevelSpec& spec_;
    Mode mode_;
    int n_;
    long& nodes_;
    long budget_;
    std::vector<std::uint8_t> occ_;
    ReachScratch reach_;
    CountState st_;
    std::vector<int> cell_order_;
    std::vector<int> pos_of_cell_;
    std::vector<std::array<std::uint8_t, kNumTiles>> class_order_;
    std::vector<double> suffix_max_;
    std::vector<double> suffix_empty_;
    std::array<std::vector<double>, kNumTiles> suffix_single_;
    std::vector<std::pair<double, int>> wall_gains_;
    std::vector<std::pair<double, int>> enemy_gains_;
    int pos_player_ = -1, pos_key_ = -1, pos_exit_ = -1;
    double best_ = kNegInf;
    double target_ = 0.0;
    std::vector<std::uint8_t> best_tiles_;
    bool have_incumbent_ = false;
};

} // namespace

LevelSolution project_level(const ScoreField& c, const LevelSpec& spec, long budget) {
    spec.validate();
    if (c.height != spec.height || c.width != spec.width || c.scores.size() != spec.vars())
        throw DimensionError("project_level: score field does not match spec dims");
    if (!c.scores.allFinite()) throw DomainError("project_level: non-finite scores");

    long nodes = 0;

    // Pass 1: optimal value, free search order.
    LevelSearch opt(c, spec, LevelSearch::Mode::optimize, nodes, budget);
    auto seed = greedy_incumbent(c, spec);
    double seed_value = kNegInf;
    const std::vector<std::uint8_t>* seed_tiles = nullptr;
    if (seed) {
        seed_value = 0.0;
        for (int i = 0; i < spec.cells(); ++i) seed_value += c.at(i, seed->tiles[i]);
        seed_tiles = &seed->tiles;
    }
    if (!opt.optimize(seed_value, seed_tiles))
        throw InfeasibleError("project_level: feasible set is empty for this spec");

    // Pass 2: lexicographically smallest assignment attaining that value.
    LevelSearch lex(c, spec, LevelSearch::Mode::reconstruct, nodes, budget);
    LevelSolution out;
    out.height = spec.height;
    out.width = spec.width;
    if (lex.reconstruct(opt.best_value())) {
        out.tiles = lex.assignment();
    } else {
        // The optimizing pass certified the value, so reconstruction cannot
        // miss it; this branch only guards against bound-slack corner cases.
        out.tiles = opt.best_tiles();
    }
    return out;
}

double level_objective(const ScoreField& c, const LevelSolution& x) {
    if (x.height != c.height || x.width != c.width)
        throw DimensionError("level_objective: dims mismatch");
    double s = 0.0;
    for (int i = 0; i < x.cells(); ++i) s += c.at(i, x.tiles[i]);
    return s;
}

LevelSolution brute_force_project(const ScoreField& c, const LevelSpec& spec) {
    spec.validate();
    int n = spec.cells();
    if (n > 9) throw BoundError("brute_force_project: grid larger than 9 cells");
    if (c.height != spec.height || c.width != spec.width || c.scores.size() != spec.vars())
        throw DimensionError("brute_force_project: score field does not match spec dims");
    if (!c.scores.allFinite()) throw DomainError("brute_force_project: non-finite scores");

    // comp[mask][cell]: component id of `cell` when `mask` bits are walls.
    int masks = 1 << n;
    std::vector<std::array<std::int8_t, 9>> comp(masks);
    for (int mask = 0; mask < masks; ++mask) {
        auto& cm = comp[mask];
        cm.fill(-1);
        std::int8_t next_id = 0;
        for (int start = 0; start < n; ++start) {
            if ((mask >> start) & 1) continue;
            if (cm[start] >= 0) continue;
            std::array<int, 9> queue;
            int head = 0, tail = 0;
            queue[tail++] = start;
            cm[start] = next_id;
            while (head < tail) {
                int cur = queue[head++];
                int r = cur / spec.width, col = cur % spec.width;
                const int dr[4] = {-1, 1, 0, 0};
                const int dc[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    int nr = r + dr[k], nc = col + dc[k];
                    if (nr < 0 || nr >= spec.height || nc < 0 || nc >= spec.width) continue;
                    int nxt = nr * spec.width + nc;
                    if ((mask >> nxt) & 1) continue;
                    if (cm[nxt] >= 0) continue;
                    cm[nxt] = next_id;
                    queue[tail++] = nxt;
                }
            }
            ++next_id;
        }
    }

    std::vector<std::uint8_t> tiles(n, 0);
    std::vector<std::uint8_t> best_tiles;
    double best = kNegInf;
    bool found = false;
    CountState st;
    int wall_mask = 0;
    int pos_player = -1, pos_key = -1, pos_exit = -1;

    // Plain lexicographic enumeration; only count caps prune (they cannot
    // exclude a feasible completion), so every member of the feasible set is
    // visited exactly once.
    auto dfs = [&](auto&& self, int cell, double partial) -> void {
        if (cell == n) {
            if (!st.minima_met(spec)) return;
            if (spec.require_connectivity) {
                const auto& cm = comp[wall_mask];
                if (cm[pos_player] != cm[pos_key] || cm[pos_key] != cm[pos_exit]) return;
            }
            if (!found || partial > best) {
                best = partial;
                best_tiles = tiles;
                found = true;
            }
            return;
        }
        for (int t = 0; t < kNumTiles; ++t) {
            if (!st.may_take(t, spec)) continue;
            st.add(t);
            if (!st.completable(n - cell - 1, spec)) {
                st.remove(t);
                continue;
            }
            tiles[cell] = static_cast<std::uint8_t>(t);
            int sp = pos_player, sk = pos_key, sx = pos_exit;
            if (t == kWall) wall_mask |= 1 << cell;
            if (t == kPlayer) pos_player = cell;
            if (t == kKey) pos_key = cell;
            if (t == kExit) pos_exit = cell;
            self(self, cell + 1, partial + c.at(cell, t));
            if (t == kWall) wall_mask &= ~(1 << cell);
            pos_player = sp;
            pos_key = sk;
            pos_exit = sx;
            st.remove(t);
        }
    };
    dfs(dfs, 0, 0.0);
    if (!found) throw InfeasibleError("brute_force_project: feasible set is empty");

    LevelSolution out;
    out.height = spec.height;
    out.width = spec.width;
    out.tiles = std::move(best_tiles);
    return out;
}

} // namespace genco
