#ifndef CELLCUT_TRAINSET_HPP
#define CELLCUT_TRAINSET_HPP

#include <cstdint>
#include <vector>

#include "cellcut/ferns.hpp"
#include "cellcut/image.hpp"

namespace cellcut {

// Mutually exclusive per-class pixel masks derived from an annotation.
// Pixels outside all three masks take no part in training.
struct ClassMasks {
    BinaryMask interior;
    BinaryMask border;
    BinaryMask exterior;
};

// interior = union of eroded cell masks; border = pixels covered by the
// dilation ring of at least two distinct cells; exterior = everything outside
// all dilated cells. Collisions resolve with precedence border > interior >
// exterior.
ClassMasks derive_class_masks(const LabelMap& annotation, int erosion_radius,
                              int dilation_radius);

// Uniform draw without replacement of min(per_class, available) pixels per
// class, each replicated at `orientations` evenly spaced angles.
// Deterministic per seed.
std::vector<TrainingSample> sample_balanced(const ClassMasks& masks, const Image& image,
                                            int per_class, int orientations,
                                            std::uint64_t rng_seed);

// Same draw taken over the pooled candidates of several annotated images, so
// the per-class budget is global rather than per image.
struct AnnotatedMasks {
    const ClassMasks* masks = nullptr;
    const Image* image = nullptr;
};
std::vector<TrainingSample> sample_balanced_pooled(const std::vector<AnnotatedMasks>& sources,
                                                   int per_class, int orientations,
                                                   std::uint64_t rng_seed);

} // namespace cellcut

#endif
