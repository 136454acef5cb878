#ifndef CELLCUT_CONFIG_HPP
#define CELLCUT_CONFIG_HPP

#include <cstdint>
#include <string>

#include "cellcut/energy.hpp"
#include "cellcut/eval.hpp"

namespace cellcut {

// Every tunable of the pipeline in one flat key=value structure. Files use
// one `key = value` per line with '#' comments; dump() -> load() round-trips
// to an identical configuration.
struct PipelineConfig {
    // ferns
    int num_ferns = 200;
    int tests_per_fern = 10;
    int window_radius = 10;
    int orientations = 10;
    int per_class = 1500;
    // annotation morphology
    int erosion_radius = 3;
    int dilation_radius = 2;
    // seed sweep
    double threshold_high = 0.95;
    double threshold_low = 0.50;
    double threshold_step = 0.05;
    int min_area = 30;
    int max_cell_area = 4000;
    // energy
    int line_length = 5;
    double alpha_w = 40.0;
    double beta_w = 15.0;
    double label_cost = 2.5;
    int line_directions = 16;
    double max_seed_distance = 50.0;
    // optimizer
    int max_sweeps = 10;
    // synthetic scenes
    SceneParams scene;
    // randomness
    std::uint64_t rng_seed = 0;

    bool operator==(const PipelineConfig&) const = default;

    void validate() const;

    EnergyParams energy_params() const;
    FernTrainingConfig fern_config() const;
    std::vector<double> seed_thresholds() const;

    // Key access for file parsing and flag overrides; unknown keys throw.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;

    std::string dump() const;
    void save(const std::string& path) const;
    static PipelineConfig load(const std::string& path); // validates
};

} // namespace cellcut

#endif
