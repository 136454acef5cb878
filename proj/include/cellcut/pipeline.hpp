#ifndef CELLCUT_PIPELINE_HPP
#define CELLCUT_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cellcut/config.hpp"
#include "cellcut/ferns.hpp"
#include "cellcut/image_io.hpp"
#include "cellcut/optimizer.hpp"
#include "cellcut/seeds.hpp"

namespace cellcut {

struct TrainPair {
    const Image* image = nullptr;
    const LabelMap* annotation = nullptr;
};

// Full training path: class masks from each annotation, one pooled balanced
// draw, rotation-replicated fit. class_counts (optional) receives the number
// of base pixels actually drawn per class.
FernsModel train_from_pairs(const std::vector<TrainPair>& pairs, const PipelineConfig& cfg,
                            std::array<std::size_t, kNumClasses>* class_counts = nullptr);

struct SegmentationOutput {
    LabelMap labels; // compacted: background 0, cells 1..K
    SeedSet seeds;
    MinimizeResult opt;
    ScoreMaps scores;
    std::uint32_t num_labels = 1; // labels in the energy model (seeds + background)
};

// score -> seeds -> energy -> minimize. seed_override skips extraction (used
// for manual seed files).
SegmentationOutput segment_image(const FernsModel& model, const Image& image,
                                 const PipelineConfig& cfg,
                                 const SeedSet* seed_override = nullptr);

// Grayscale base with one deterministic color per label; label boundaries are
// drawn saturated.
RgbImage render_overlay(const Image& image, const LabelMap& labels);

// Per-move energy trace as CSV (move 0 = initial labeling; each later row
// names the sweep and expansion label it came from).
std::string trace_csv(const MinimizeResult& opt, std::uint32_t num_labels);

} // namespace cellcut

#endif
