#ifndef CELLCUT_IMAGE_HPP
#define CELLCUT_IMAGE_HPP

#include <cstdint>
#include <vector>

#include "cellcut/error.hpp"

namespace cellcut {

struct Coord {
    int x = 0;
    int y = 0;
    bool operator==(const Coord&) const = default;
};

// Row-major grayscale image, intensities normalized to [0,1].
class Image {
public:
    Image() = default;
    Image(int width, int height, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    float at(int x, int y) const { return data_[idx(x, y)]; }
    float& at(int x, int y) { return data_[idx(x, y)]; }

    // Clamp-to-edge read; any integer coordinate is valid.
    float sample_clamped(int x, int y) const;

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

private:
    std::size_t idx(int x, int y) const { return std::size_t(y) * width_ + x; }
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

// Unconstrained float grid (log-scores, posteriors, cost maps).
struct FloatGrid {
    int width = 0;
    int height = 0;
    std::vector<float> v;

    FloatGrid() = default;
    FloatGrid(int w, int h, float fill = 0.0f) : width(w), height(h), v(std::size_t(w) * h, fill) {}
    float at(int x, int y) const { return v[std::size_t(y) * width + x]; }
    float& at(int x, int y) { return v[std::size_t(y) * width + x]; }
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int x, int y) const { return bits_[idx(x, y)] != 0; }
    void set(int x, int y, bool v) { bits_[idx(x, y)] = v ? 1 : 0; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    std::size_t count() const;
    BinaryMask complement() const;
    bool operator==(const BinaryMask&) const = default;

    const std::vector<std::uint8_t>& bits() const { return bits_; }

private:
    std::size_t idx(int x, int y) const { return std::size_t(y) * width_ + x; }
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Per-pixel labels: 0 = background, k > 0 = cell id.
class LabelMap {
public:
    LabelMap() = default;
    LabelMap(int width, int height, std::uint32_t fill = 0);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint32_t at(int x, int y) const { return labels_[idx(x, y)]; }
    std::uint32_t& at(int x, int y) { return labels_[idx(x, y)]; }

    std::uint32_t max_label() const;

    // Renumbers the labels in use to the contiguous set {0..K}, ascending by
    // original id. Background stays 0.
    void compact();

    const std::vector<std::uint32_t>& labels() const { return labels_; }
    std::vector<std::uint32_t>& labels() { return labels_; }
    bool operator==(const LabelMap&) const = default;

private:
    std::size_t idx(int x, int y) const { return std::size_t(y) * width_ + x; }
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint32_t> labels_;
};

using PixelPath = std::vector<Coord>;

// Visits the 8-connected integer line from p to q, endpoints included,
// max(|dx|,|dy|)+1 pixels; ties round toward the driving axis. Stops early
// when fn returns false.
template <typename F>
void for_line(Coord p, Coord q, F&& fn) {
    const int adx = q.x >= p.x ? q.x - p.x : p.x - q.x;
    const int ady = q.y >= p.y ? q.y - p.y : p.y - q.y;
    const int sx = q.x >= p.x ? 1 : -1;
    const int sy = q.y >= p.y ? 1 : -1;
    int x = p.x, y = p.y;
    if (!fn(Coord{x, y})) return;
    if (adx >= ady) {
        int err = 2 * ady - adx;
        while (x != q.x) {
            if (err > 0) {
                y += sy;
                err -= 2 * adx;
            }
            x += sx;
            err += 2 * ady;
            if (!fn(Coord{x, y})) return;
        }
    } else {
        int err = 2 * adx - ady;
        while (y != q.y) {
            if (err > 0) {
                x += sx;
                err -= 2 * ady;
            }
            y += sy;
            err += 2 * adx;
            if (!fn(Coord{x, y})) return;
        }
    }
}

// Materialized form of for_line.
PixelPath bresenham(Coord p, Coord q);

// Disc structuring element offsets: all (dx,dy) with dx^2+dy^2 <= r^2.
std::vector<Coord> disc_offsets(int radius);

// Binary erosion with a disc structuring element. A pixel stays set iff every
// disc offset lands on a set pixel; positions outside the image read as
// border_value (false matches "the disc must fit inside the input").
BinaryMask erode(const BinaryMask& mask, int radius, bool border_value = false);

// Binary dilation with a disc structuring element. Out-of-image positions
// contribute nothing.
BinaryMask dilate(const BinaryMask& mask, int radius);

struct ComponentLabels {
    LabelMap labels;                     // component ids, compact from 1
    std::vector<std::size_t> sizes;      // sizes[k-1] = pixel count of component k
    std::size_t count() const { return sizes.size(); }
};

ComponentLabels connected_components(const BinaryMask& mask, int connectivity = 8);

} // namespace cellcut

#endif
