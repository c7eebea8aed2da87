#ifndef GENCO_DATASET_HPP
#define GENCO_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "genco/level.hpp"
#include "genco/rng.hpp"

namespace genco {

// Header of an on-disk dataset; the checksum covers the record bytes, so a
// file validates itself on load.
struct DatasetManifest {
    std::string kind; // "levels" | "terrain"
    int count = 0;
    int height = 0;
    int width = 0;
    std::uint64_t seed = 0;
    std::uint64_t checksum = 0;
};

// FNV-1a 64 over raw bytes.
std::uint64_t fnv1a(const std::string& bytes);

struct LevelDataset {
    DatasetManifest manifest;
    std::vector<LevelSolution> records;
};

struct TerrainDataset {
    DatasetManifest manifest;
    std::vector<Vec> records; // each H*W*8, cells sum to 1
};

void save_levels(const std::string& path, const LevelDataset& ds);
LevelDataset load_levels(const std::string& path);

void save_terrain(const std::string& path, const TerrainDataset& ds);
TerrainDataset load_terrain(const std::string& path);

// Knobs of the constructive level sampler.
struct LevelStyle {
    double wall_fraction_lo = 0.2; // of the wall cap
    double wall_fraction_hi = 1.0;
    int enemies_lo = 0;
    int enemies_hi = 3;
    int attempts_per_level = 200;
};

// n distinct feasible levels: place the singleton tiles, carve connecting
// corridors, then sprinkle walls and enemies within bounds. Every record
// passes check_feasible; throws InfeasibleError when n distinct levels are
// not reachable within the attempt budget.
LevelDataset synth_levels(const LevelSpec& spec, int n, std::uint64_t seed,
                          const LevelStyle& style = {});

// n blob-noise tile maps: per-class Gaussian blobs softmaxed per cell, so
// classes cluster spatially and every cell is a probability vector.
TerrainDataset synth_terrain(int height, int width, int n, std::uint64_t seed);

// Character-art dump of level samples; parse_grid_dump inverts it exactly.
std::string dump_grids(const std::vector<LevelSolution>& levels);
std::vector<LevelSolution> parse_grid_dump(const std::string& text);

} // namespace genco

#endif // GENCO_DATASET_HPP
