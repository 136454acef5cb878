#include "cellcut/trainset.hpp"

#include <algorithm>
#include <numbers>
#include <random>

namespace cellcut {
namespace {

struct CellBox {
    int x0, y0, x1, y1; // inclusive
    bool valid = false;
};

// Morphology runs per cell on a padded crop so nearby cells do not interact.
BinaryMask crop_cell(const LabelMap& ann, std::uint32_t id, const CellBox& box, int pad) {
    const int w = box.x1 - box.x0 + 1 + 2 * pad;
    const int h = box.y1 - box.y0 + 1 + 2 * pad;
    BinaryMask m(w, h, false);
    for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x)
            if (ann.at(x, y) == id) m.set(x - box.x0 + pad, y - box.y0 + pad, true);
    return m;
}

} // namespace

ClassMasks derive_class_masks(const LabelMap& annotation, int erosion_radius,
                              int dilation_radius) {
    const int w = annotation.width(), h = annotation.height();
    const std::uint32_t max_id = annotation.max_label();
    if (max_id == 0) throw PreconditionError("annotation contains no cells");

    std::vector<CellBox> boxes(max_id + 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint32_t id = annotation.at(x, y);
            if (id == 0) continue;
            auto& b = boxes[id];
            if (!b.valid) {
                b = {x, y, x, y, true};
            } else {
                b.x0 = std::min(b.x0, x);
                b.y0 = std::min(b.y0, y);
                b.x1 = std::max(b.x1, x);
                b.y1 = std::max(b.y1, y);
            }
        }
    }

    BinaryMask interior(w, h, false);
    BinaryMask dilated_any(w, h, false);
    std::vector<std::uint8_t> ring_count(std::size_t(w) * h, 0);

    const int pad = std::max(erosion_radius, dilation_radius) + 1;
    for (std::uint32_t id = 1; id <= max_id; ++id) {
        const auto& box = boxes[id];
        if (!box.valid) continue;
        const BinaryMask cell = crop_cell(annotation, id, box, pad);
        const BinaryMask eroded = erode(cell, erosion_radius);
        const BinaryMask grown = dilate(cell, dilation_radius);

        for (int cy = 0; cy < cell.height(); ++cy) {
            const int y = cy + box.y0 - pad;
            if (y < 0 || y >= h) continue;
            for (int cx = 0; cx < cell.width(); ++cx) {
                const int x = cx + box.x0 - pad;
                if (x < 0 || x >= w) continue;
                if (eroded.at(cx, cy)) interior.set(x, y, true);
                if (grown.at(cx, cy)) {
                    dilated_any.set(x, y, true);
                    if (!cell.at(cx, cy)) {
                        auto& c = ring_count[std::size_t(y) * w + x];
                        if (c < 255) ++c;
                    }
                }
            }
        }
    }

    ClassMasks out{BinaryMask(w, h, false), BinaryMask(w, h, false), BinaryMask(w, h, false)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (ring_count[std::size_t(y) * w + x] >= 2) {
                out.border.set(x, y, true);
            } else if (interior.at(x, y)) {
                out.interior.set(x, y, true);
            } else if (!dilated_any.at(x, y)) {
                out.exterior.set(x, y, true);
            }
        }
    }
    return out;
}

std::vector<TrainingSample> sample_balanced(const ClassMasks& masks, const Image& image,
                                            int per_class, int orientations,
                                            std::uint64_t rng_seed) {
    std::vector<AnnotatedMasks> one{{&masks, &image}};
    return sample_balanced_pooled(one, per_class, orientations, rng_seed);
}

std::vector<TrainingSample> sample_balanced_pooled(const std::vector<AnnotatedMasks>& sources,
                                                   int per_class, int orientations,
                                                   std::uint64_t rng_seed) {
    if (per_class < 0) throw InvalidArgumentError("per-class count must be >= 0");
    if (orientations < 1) throw InvalidArgumentError("need at least one orientation");

    struct Candidate {
        const Image* image;
        int x, y;
    };
    std::array<std::vector<Candidate>, kNumClasses> pools;
    for (const auto& src : sources) {
        const std::array<const BinaryMask*, kNumClasses> class_masks = {
            &src.masks->interior, &src.masks->border, &src.masks->exterior};
        for (int c = 0; c < kNumClasses; ++c) {
            const auto& m = *class_masks[c];
            for (int y = 0; y < m.height(); ++y)
                for (int x = 0; x < m.width(); ++x)
                    if (m.at(x, y)) pools[c].push_back({src.image, x, y});
        }
    }

    std::mt19937_64 rng(rng_seed);
    std::vector<TrainingSample> samples;
    for (int c = 0; c < kNumClasses; ++c) {
        auto& pool = pools[c];
        if (per_class > 0 && pool.empty())
            throw PreconditionError(std::string("no candidate pixels for class ") +
                                    pixel_class_name(PixelClass(c)));
        const std::size_t take = std::min(std::size_t(per_class), pool.size());
        // partial Fisher-Yates
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        for (std::size_t i = 0; i < take; ++i) {
            for (int k = 0; k < orientations; ++k) {
                const double angle = 2.0 * std::numbers::pi * k / orientations;
                samples.push_back({pool[i].image, pool[i].x, pool[i].y, PixelClass(c), angle});
            }
        }
    }
    return samples;
}

} // namespace cellcut
