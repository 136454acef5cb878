#ifndef CELLCUT_EVAL_HPP
#define CELLCUT_EVAL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cellcut/ferns.hpp"
#include "cellcut/image.hpp"
#include "cellcut/trainset.hpp"

namespace cellcut {

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

// A cell aggregate: Voronoi regions of sampled centers inside a disc, with a
// bright membrane ridge along region boundaries, darker speckled interiors,
// then Gaussian blur and additive noise. Ground truth keeps the pre-blur
// Voronoi labels.
struct SceneParams {
    int width = 512;
    int height = 512;
    int cell_count = 20;
    double mean_cell_area = 2200.0;  // pixels^2 per cell; sets the aggregate radius
    int membrane_width = 2;
    double membrane_brightness = 0.85;
    double interior_brightness = 0.28;
    double background_brightness = 0.08;
    double texture_sigma = 0.03;     // interior speckle
    double blur_sigma = 1.0;
    double noise_sigma = 0.03;

    void validate() const; // throws InvalidArgumentError, incl. impossible packing
};

struct SyntheticScene {
    Image image;
    LabelMap ground_truth;
};

SyntheticScene generate_scene(const SceneParams& params, std::uint64_t rng_seed);

// Separable Gaussian blur with clamp-to-edge sampling; sigma <= 0 returns the
// input unchanged.
Image gaussian_blur(const Image& img, double sigma);

// ---------------------------------------------------------------------------
// Segmentation metrics
// ---------------------------------------------------------------------------

struct CellOverlap {
    std::uint32_t truth_id = 0;
    std::uint32_t matched_label = 0; // 0 = unmatched
    double dice = 0.0;
};

struct SegmentationMetrics {
    double mean_dice = 0.0;
    int truth_cells = 0;
    int splits = 0;            // truth cells covered >=20% by two or more labels
    int merges = 0;            // labels claiming >=20% of two or more truth cells
    std::uint32_t n_labels_used = 0; // nonbackground labels present in the prediction
    std::vector<CellOverlap> per_cell;
};

// Best-overlap matching: each truth cell pairs with the nonbackground label
// maximizing intersection; Dice = 2|A∩B| / (|A|+|B|); unmatched cells score 0.
// Invariant under any permutation of predicted label ids.
SegmentationMetrics segmentation_metrics(const LabelMap& predicted, const LabelMap& truth);

// ---------------------------------------------------------------------------
// Classification cross-validation
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
    // counts[true][predicted]
    std::array<std::array<std::uint64_t, 3>, 3> counts{};

    void add(PixelClass truth, PixelClass predicted) {
        ++counts[static_cast<int>(truth)][static_cast<int>(predicted)];
    }
    std::uint64_t total() const;
    double accuracy() const; // trace / total
};

struct FernTrainingConfig {
    int num_ferns = 200;
    int tests_per_fern = 10;
    int window_radius = 10;
    int orientations = 10;
    std::size_t per_class = 1500;
    std::uint64_t rng_seed = 0;
};

struct CrossValidationResult {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0; // population standard deviation over folds
    std::vector<ConfusionMatrix> folds;
};

// Stratified k-fold over one balanced pool of base samples drawn across all
// sources. Each fold's model trains only on the other folds' samples,
// replicated over the configured orientations; testing always runs at
// orientation 0.
CrossValidationResult cross_validate(const std::vector<AnnotatedMasks>& sources, int k,
                                     const FernTrainingConfig& config);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

// Flat key=value lines and the JSON equivalent. Keys: mean_dice, splits,
// merges, n_labels_used, and accuracy_mean/accuracy_std when CV results are
// given.
std::string metrics_text(const SegmentationMetrics* seg, const CrossValidationResult* cv);
std::string metrics_json(const SegmentationMetrics* seg, const CrossValidationResult* cv);

} // namespace cellcut

#endif
