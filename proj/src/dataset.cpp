#include "genco/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "genco/net.hpp" // format_double / parse_double

namespace genco {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << bytes;
    if (!out) throw IoError("write failed: " + path);
}

std::string header_line(std::istringstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("truncated dataset header: " + path);
    return line;
}

std::uint64_t parse_field_u64(const std::string& line, const std::string& key,
                              const std::string& path) {
    std::istringstream ss(line);
    std::string k;
    std::uint64_t v = 0;
    if (!(ss >> k >> v) || k != key)
        throw IoError("dataset header: expected '" + key + "' in " + path);
    return v;
}

std::pair<int, int> parse_dims(const std::string& line, const std::string& path) {
    std::istringstream ss(line);
    std::string k;
    int h = 0, w = 0;
    if (!(ss >> k >> h >> w) || k != "dims")
        throw IoError("dataset header: expected 'dims' in " + path);
    return {h, w};
}

std::string checksum_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_checksum(const std::string& line, const std::string& path) {
    std::istringstream ss(line);
    std::string k, hex;
    if (!(ss >> k >> hex) || k != "checksum" || hex.size() != 16)
        throw IoError("dataset header: expected 'checksum' in " + path);
    return std::stoull(hex, nullptr, 16);
}

} // namespace

void save_levels(const std::string& path, const LevelDataset& ds) {
    std::string records;
    for (const auto& lvl : ds.records) records += render_level(lvl);
    std::ostringstream out;
    out << "genco-levels v1\n";
    out << "legend " << kTileChars << '\n';
    out << "dims " << ds.manifest.height << ' ' << ds.manifest.width << '\n';
    out << "count " << ds.records.size() << '\n';
    out << "seed " << ds.manifest.seed << '\n';
    out << "checksum " << checksum_hex(fnv1a(records)) << '\n';
    out << records;
    write_file(path, out.str());
}

LevelDataset load_levels(const std::string& path) {
    std::istringstream in(read_file(path));
    if (header_line(in, path) != "genco-levels v1")
        throw IoError("not a genco-levels v1 file: " + path);
    std::string legend = header_line(in, path);
    if (legend != std::string("legend ") + kTileChars)
        throw IoError("legend mismatch in " + path);
    LevelDataset ds;
    ds.manifest.kind = "levels";
    auto [h, w] = parse_dims(header_line(in, path), path);
    ds.manifest.height = h;
    ds.manifest.width = w;
    ds.manifest.count = static_cast<int>(parse_field_u64(header_line(in, path), "count", path));
    ds.manifest.seed = parse_field_u64(header_line(in, path), "seed", path);
    ds.manifest.checksum = parse_checksum(header_line(in, path), path);

    std::string records;
    std::string line;
    std::vector<std::string> grid;
    while (std::getline(in, line)) {
        records += line;
        records += '\n';
        grid.push_back(line);
        if (static_cast<int>(grid.size()) == h) {
            ds.records.push_back(parse_level(grid));
            grid.clear();
        }
    }
    if (!grid.empty()) throw IoError("trailing partial record in " + path);
    if (static_cast<int>(ds.records.size()) != ds.manifest.count)
        throw IoError("record count mismatch in " + path);
    if (fnv1a(records) != ds.manifest.checksum)
        throw IoError("checksum mismatch in " + path);
    return ds;
}

void save_terrain(const std::string& path, const TerrainDataset& ds) {
    std::ostringstream rec;
    for (const auto& map : ds.records) {
        int cells = static_cast<int>(map.size()) / kNumTiles;
        for (int c = 0; c < cells; ++c) {
            for (int t = 0; t < kNumTiles; ++t) {
                if (t) rec << ' ';
                rec << format_double(map[c * kNumTiles + t]);
            }
            rec << '\n';
        }
    }
    std::string records = rec.str();
    std::ostringstream out;
    out << "genco-terrain v1\n";
    out << "classes " << kNumTiles << '\n';
    out << "dims " << ds.manifest.height << ' ' << ds.manifest.width << '\n';
    out << "count " << ds.records.size() << '\n';
    out << "seed " << ds.manifest.seed << '\n';
    out << "checksum " << checksum_hex(fnv1a(records)) << '\n';
    out << records;
    write_file(path, out.str());
}

TerrainDataset load_terrain(const std::string& path) {
    std::istringstream in(read_file(path));
    if (header_line(in, path) != "genco-terrain v1")
        throw IoError("not a genco-terrain v1 file: " + path);
    if (parse_field_u64(header_line(in, path), "classes", path) != kNumTiles)
        throw IoError("class count mismatch in " + path);
    TerrainDataset ds;
    ds.manifest.kind = "terrain";
    auto [h, w] = parse_dims(header_line(in, path), path);
    ds.manifest.height = h;
    ds.manifest.width = w;
    ds.manifest.count = static_cast<int>(parse_field_u64(header_line(in, path), "count", path));
    ds.manifest.seed = parse_field_u64(header_line(in, path), "seed", path);
    ds.manifest.checksum = parse_checksum(header_line(in, path), path);

    int cells = h * w;
    std::string records;
    std::string line;
    Vec map(cells * kNumTiles);
    int cell = 0;
    while (std::getline(in, line)) {
        records += line;
        records += '\n';
        std::istringstream ss(line);
        std::string tok;
        for (int t = 0; t < kNumTiles; ++t) {
            if (!(ss >> tok)) throw IoError("short terrain row in " + path);
            map[cell * kNumTiles + t] = parse_double(tok);
        }
        if (ss >> tok) throw IoError("long terrain row in " + path);
        if (++cell == cells) {
            ds.records.push_back(map);
            cell = 0;
        }
    }
    if (cell != 0) throw IoError("trailing partial record in " + path);
    if (static_cast<int>(ds.records.size()) != ds.manifest.count)
        throw IoError("record count mismatch in " + path);
    if (fnv1a(records) != ds.manifest.checksum)
        throw IoError("checksum mismatch in " + path);
    return ds;
}

namespace {

// Row-first corridor between two cells; every visited cell is returned.
std::vector<int> carve_corridor(int from, int to, int width) {
    std::vector<int> cells;
    int r = from / width, c = from % width;
    int tr = to / width, tc = to % width;
    cells.push_back(from);
    while (r != tr) {
        r += (tr > r) ? 1 : -1;
        cells.push_back(r * width + c);
    }
    while (c != tc) {
        c += (tc > c) ? 1 : -1;
        cells.push_back(r * width + c);
    }
    return cells;
}

} // namespace

LevelDataset synth_levels(const LevelSpec& spec, int n, std::uint64_t seed,
                          const LevelStyle& style) {
    spec.validate();
    if (n < 1) throw ContractError("synth_levels: n must be >= 1");
    RngStream rng(seed);
    int cells = spec.cells();
    LevelDataset ds;
    ds.manifest.kind = "levels";
    ds.manifest.height = spec.height;
    ds.manifest.width = spec.width;
    ds.manifest.seed = seed;
    std::unordered_set<std::string> seen;
    long attempts = 0;
    long budget = static_cast<long>(style.attempts_per_level) * n;
    while (static_cast<int>(ds.records.size()) < n) {
        if (++attempts > budget)
            throw InfeasibleError("synth_levels: could not reach n distinct levels "
                                  "within attempt budget");
        LevelSolution lvl;
        lvl.height = spec.height;
        lvl.width = spec.width;
        lvl.tiles.assign(cells, kEmpty);

        // Three distinct cells for player/key/exit.
        int p = static_cast<int>(rng.below(cells));
        int k = static_cast<int>(rng.below(cells));
        int x = static_cast<int>(rng.below(cells));
        if (p == k || k == x || p == x) continue;
        lvl.tiles[p] = kPlayer;
        lvl.tiles[k] = kKey;
        lvl.tiles[x] = kExit;

        // Corridors guarantee the routes; their cells stay non-wall.
        std::vector<char> protected_(cells, 0);
        for (int cell : carve_corridor(p, k, spec.width)) protected_[cell] = 1;
        for (int cell : carve_corridor(k, x, spec.width)) protected_[cell] = 1;

        // Enemies may sit anywhere that is still empty (they are passable).
        int n_enemies = style.enemies_lo +
                        static_cast<int>(rng.below(style.enemies_hi - style.enemies_lo + 1));
        n_enemies = std::min(n_enemies, spec.enemy_total.max_count);
        for (int e = 0; e < n_enemies; ++e) {
            int cell = static_cast<int>(rng.below(cells));
            if (lvl.tiles[cell] != kEmpty) continue;
            int cls = kEnemy1 + static_cast<int>(rng.below(3));
            lvl.tiles[cell] = static_cast<std::uint8_t>(cls);
        }

        // Walls on unprotected empty cells, up to a styled share of the cap.
        double frac = rng.uniform(style.wall_fraction_lo, style.wall_fraction_hi);
        int n_walls = static_cast<int>(std::floor(frac * spec.bounds[kWall].max_count));
        int placed = 0;
        for (int tries = 0; tries < cells * 4 && placed < n_walls; ++tries) {
            int cell = static_cast<int>(rng.below(cells));
            if (protected_[cell] || lvl.tiles[cell] != kEmpty) continue;
            lvl.tiles[cell] = kWall;
            ++placed;
        }

        if (!check_feasible(lvl, spec)) continue;
        if (!seen.insert(lvl.key()).second) continue;
        ds.records.push_back(std::move(lvl));
    }
    ds.manifest.count = n;
    std::string records;
    for (const auto& lvl : ds.records) records += render_level(lvl);
    ds.manifest.checksum = fnv1a(records);
    return ds;
}

TerrainDataset synth_terrain(int height, int width, int n, std::uint64_t seed) {
    if (height < 1 || width < 1) throw ContractError("synth_terrain: bad dims");
    if (n < 1) throw ContractError("synth_terrain: n must be >= 1");
    RngStream rng(seed);
    TerrainDataset ds;
    ds.manifest.kind = "terrain";
    ds.manifest.height = height;
    ds.manifest.width = width;
    ds.manifest.seed = seed;
    int cells = height * width;
    constexpr int kBlobsPerClass = 2;
    constexpr double kTemperature = 0.7;
    for (int i = 0; i < n; ++i) {
        Mat logits = Mat::Zero(cells, kNumTiles);
        for (int t = 0; t < kNumTiles; ++t) {
            double bias = rng.uniform(-0.5, 0.5);
            for (int c = 0; c < cells; ++c) logits(c, t) = bias;
            for (int b = 0; b < kBlobsPerClass; ++b) {
                double cr = rng.uniform(0.0, height - 1.0);
                double cc = rng.uniform(0.0, width - 1.0);
                double sigma = rng.uniform(0.8, 2.5);
                double weight = rng.uniform(0.5, 2.0);
                for (int c = 0; c < cells; ++c) {
                    double dr = c / width - cr;
                    double dc = c % width - cc;
                    logits(c, t) += weight * std::exp(-(dr * dr + dc * dc) / (2 * sigma * sigma));
                }
            }
        }
        Vec map(cells * kNumTiles);
        for (int c = 0; c < cells; ++c) {
            double mx = logits.row(c).maxCoeff();
            double z = 0.0;
            for (int t = 0; t < kNumTiles; ++t) z += std::exp((logits(c, t) - mx) / kTemperature);
            for (int t = 0; t < kNumTiles; ++t)
                map[c * kNumTiles + t] = std::exp((logits(c, t) - mx) / kTemperature) / z;
        }
        ds.records.push_back(std::move(map));
    }
    ds.manifest.count = n;
    std::ostringstream rec;
    for (const auto& map : ds.records) {
        for (int c = 0; c < cells; ++c) {
            for (int t = 0; t < kNumTiles; ++t) {
                if (t) rec << ' ';
                rec << format_double(map[c * kNumTiles + t]);
            }
            rec << '\n';
        }
    }
    ds.manifest.checksum = fnv1a(rec.str());
    return ds;
}

std::string dump_grids(const std::vector<LevelSolution>& levels) {
    std::ostringstream out;
    out << "legend " << kTileChars << '\n';
    for (std::size_t i = 0; i < levels.size(); ++i) {
        out << "# " << i << '\n';
        out << render_level(levels[i]);
    }
    return out.str();
}

std::vector<LevelSolution> parse_grid_dump(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<LevelSolution> out;
    std::vector<std::string> grid;
    auto flush = [&] {
        if (!grid.empty()) {
            out.push_back(parse_level(grid));
            grid.clear();
        }
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("legend ", 0) == 0) {
            if (line != std::string("legend ") + kTileChars)
                throw IoError("grid dump: legend mismatch");
            continue;
        }
        if (line[0] == '#') {
            flush();
            continue;
        }
        grid.push_back(line);
    }
    flush();
    return out;
}

} // namespace genco
