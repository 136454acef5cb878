#ifndef CELLCUT_SEEDS_HPP
#define CELLCUT_SEEDS_HPP

#include <string>
#include <vector>

#include "cellcut/image.hpp"

namespace cellcut {

struct Seed {
    Coord center;
    float birth_threshold = 0.0f; // threshold at which the component was accepted
    std::size_t component_size = 0;
};

// Seeds carry labels 1..n by list position; label 0 is the background.
struct SeedSet {
    std::vector<Seed> seeds;
    bool empty_warning = false; // no component ever qualified

    std::size_t size() const { return seeds.size(); }
};

// Sweeps the thresholds from high to low over the interior-posterior map. At
// each level the 8-connected components of {posterior >= t} are accepted when
// their size lies in [min_area, max_cell_area) and they do not contain a
// previously accepted seed center. Seed center = component centroid snapped
// to the nearest component pixel.
SeedSet extract_seeds(const FloatGrid& interior_posterior, const std::vector<double>& thresholds,
                      std::size_t max_cell_area, std::size_t min_area);

std::vector<double> default_thresholds(double high, double low, double step);

// Manual override file: one "x y" pair per line; '#' starts a comment.
SeedSet load_seed_file(const std::string& path, int width, int height);

} // namespace cellcut

#endif
