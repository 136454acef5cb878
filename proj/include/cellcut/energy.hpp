#ifndef CELLCUT_ENERGY_HPP
#define CELLCUT_ENERGY_HPP

#include <cstdint>
#include <vector>

#include "cellcut/ferns.hpp"
#include "cellcut/seeds.hpp"

namespace cellcut {

struct EnergyParams {
    int line_length = 5;          // d, background ray length in pixels
    double alpha_w = 40.0;        // sigmoid scale
    double beta_w = 15.0;         // sigmoid slope
    double label_cost = 2.5;      // per used cell label; background exempt
    int line_directions = 16;     // discrete ray directions for the background term
    double max_seed_distance = 50.0;

    void validate() const;
};

struct Labeling {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> ids;

    Labeling() = default;
    Labeling(int w, int h, std::uint32_t fill = 0)
        : width(w), height(h), ids(std::size_t(w) * h, fill) {}
    std::uint32_t at(int x, int y) const { return ids[std::size_t(y) * width + x]; }
    std::uint32_t& at(int x, int y) { return ids[std::size_t(y) * width + x]; }
    bool operator==(const Labeling&) const = default;
};

struct GridEdge {
    std::uint32_t p;
    std::uint32_t q;
    float weight;
};

// Assembled multi-label energy: per-pixel data costs, 8-neighborhood Potts
// edges, and one global cost per used label.
struct EnergyModel {
    int width = 0;
    int height = 0;
    std::uint32_t num_labels = 1; // seeds + background; label 0 = background
    std::vector<float> data_cost; // [pixel * num_labels + label]
    std::vector<GridEdge> edges;
    std::vector<double> label_cost;

    std::size_t num_pixels() const { return std::size_t(width) * height; }
    float data(std::size_t pixel, std::uint32_t label) const {
        return data_cost[pixel * num_labels + label];
    }
};

// Border-crossing integral along the pixel-to-seed segment: sum over the line
// of max(0, p_e - p_i, p_b - p_i) on posteriors. Pixels beyond
// max_seed_distance from the seed get the sentinel cost line_length + 1.
double seed_data_cost(const ScoreMaps& scores, Coord p, const Seed& seed,
                      const EnergyParams& params);

// Background fidelity: the cheapest escape-to-background ray. Minimum over
// the discrete directions of the summed exterior unlikelihood (1 - p_e) along
// a ray of line_length pixels starting at p; rays clipped by the image edge
// repeat their last in-bounds sample.
double background_data_cost(const ScoreMaps& scores, Coord p, const EnergyParams& params);

// W(p,q) = 1 - 1/(1 + alpha_w * exp(-beta_w * M)) with
// M = max over {p,q} of min(p_b - p_i, p_b - p_e). p and q must be 8-adjacent.
double edge_weight(const ScoreMaps& scores, Coord p, Coord q, const EnergyParams& params);

EnergyModel build_energy(const ScoreMaps& scores, const SeedSet& seeds,
                         const EnergyParams& params);

// Direct evaluation of the full objective; the optimizer's oracle.
double evaluate_energy(const EnergyModel& model, const Labeling& labeling);

// Cheapest-data-cost label per pixel; the optimizer's default start.
Labeling initial_labeling(const EnergyModel& model);

} // namespace cellcut

#endif
