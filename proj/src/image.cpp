#include "cellcut/image.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>

namespace cellcut {

Image::Image(int width, int height, float fill)
    : width_(width), height_(height), data_(std::size_t(width) * height, fill) {
    if (width <= 0 || height <= 0)
        throw InvalidArgumentError("image dimensions must be positive");
}

float Image::sample_clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return data_[idx(x, y)];
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height), bits_(std::size_t(width) * height, fill ? 1 : 0) {
    if (width <= 0 || height <= 0)
        throw InvalidArgumentError("mask dimensions must be positive");
}

std::size_t BinaryMask::count() const {
    return std::size_t(std::count(bits_.begin(), bits_.end(), std::uint8_t(1)));
}

BinaryMask BinaryMask::complement() const {
    BinaryMask out = *this;
    for (auto& b : out.bits_) b = b ? 0 : 1;
    return out;
}

LabelMap::LabelMap(int width, int height, std::uint32_t fill)
    : width_(width), height_(height), labels_(std::size_t(width) * height, fill) {
    if (width <= 0 || height <= 0)
        throw InvalidArgumentError("label map dimensions must be positive");
}

std::uint32_t LabelMap::max_label() const {
    std::uint32_t m = 0;
    for (auto l : labels_) m = std::max(m, l);
    return m;
}

void LabelMap::compact() {
    std::uint32_t maxl = max_label();
    std::vector<std::uint8_t> used(maxl + 1, 0);
    for (auto l : labels_) used[l] = 1;
    std::vector<std::uint32_t> remap(maxl + 1, 0);
    std::uint32_t next = 1;
    for (std::uint32_t l = 1; l <= maxl; ++l)
        if (used[l]) remap[l] = next++;
    for (auto& l : labels_) l = remap[l];
}

PixelPath bresenham(Coord p, Coord q) {
    PixelPath path;
    path.reserve(std::size_t(std::max(std::abs(q.x - p.x), std::abs(q.y - p.y))) + 1);
    for_line(p, q, [&](Coord c) {
        path.push_back(c);
        return true;
    });
    return path;
}

std::vector<Coord> disc_offsets(int radius) {
    if (radius < 0)
        throw InvalidArgumentError("structuring element radius must be >= 0");
    std::vector<Coord> offs;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) offs.push_back({dx, dy});
    return offs;
}

BinaryMask erode(const BinaryMask& mask, int radius, bool border_value) {
    if (radius == 0) return mask;
    const auto offs = disc_offsets(radius);
    BinaryMask out(mask.width(), mask.height(), false);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            bool keep = true;
            for (const auto& o : offs) {
                const int nx = x + o.x, ny = y + o.y;
                const bool v = mask.in_bounds(nx, ny) ? mask.at(nx, ny) : border_value;
                if (!v) {
                    keep = false;
                    break;
                }
            }
            out.set(x, y, keep);
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius == 0) return mask;
    const auto offs = disc_offsets(radius);
    BinaryMask out(mask.width(), mask.height(), false);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            for (const auto& o : offs) {
                const int nx = x + o.x, ny = y + o.y;
                if (mask.in_bounds(nx, ny)) out.set(nx, ny, true);
            }
        }
    }
    return out;
}

ComponentLabels connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw InvalidArgumentError("connectivity must be 4 or 8");

    static const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int ndirs = connectivity == 4 ? 4 : 8;

    ComponentLabels out;
    out.labels = LabelMap(mask.width(), mask.height(), 0);
    std::deque<Coord> queue;
    std::uint32_t next = 0;

    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y) || out.labels.at(x, y) != 0) continue;
            ++next;
            std::size_t size = 0;
            out.labels.at(x, y) = next;
            queue.push_back({x, y});
            while (!queue.empty()) {
                Coord c = queue.front();
                queue.pop_front();
                ++size;
                for (int d = 0; d < ndirs; ++d) {
                    const int nx = c.x + dx8[d], ny = c.y + dy8[d];
                    if (!mask.in_bounds(nx, ny)) continue;
                    if (!mask.at(nx, ny) || out.labels.at(nx, ny) != 0) continue;
                    out.labels.at(nx, ny) = next;
                    queue.push_back({nx, ny});
                }
            }
            out.sizes.push_back(size);
        }
    }
    return out;
}

} // namespace cellcut
