#ifndef CELLCUT_IMAGE_IO_HPP
#define CELLCUT_IMAGE_IO_HPP

#include <array>
#include <string>

#include "cellcut/image.hpp"

namespace cellcut {

// Grayscale PNG (8 or 16 bit) or binary PGM (P5); intensities are normalized
// by the source max value so the result lives in [0,1]. Format is picked by
// file extension (.png / .pgm).
Image load_image(const std::string& path);

// bit_depth must be 8 or 16. Values are quantized with round-to-nearest.
void save_image_png(const Image& img, const std::string& path, int bit_depth = 16);
void save_image_pgm(const Image& img, const std::string& path, int bit_depth = 8);
void save_image(const Image& img, const std::string& path, int bit_depth = 16);

// Label maps are stored as 16-bit grayscale PNG, pixel value = label id.
// Round trips are bit exact; labels above 65535 are rejected on save.
LabelMap load_label_map(const std::string& path);
void save_label_map(const LabelMap& map, const std::string& path);

// 8-bit RGB PNG writer for overlays.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // 3 bytes per pixel, row-major

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), rgb(std::size_t(w) * h * 3, 0) {}
    void set(int x, int y, std::array<std::uint8_t, 3> c) {
        auto* p = &rgb[(std::size_t(y) * width + x) * 3];
        p[0] = c[0]; p[1] = c[1]; p[2] = c[2];
    }
};
void save_rgb_png(const RgbImage& img, const std::string& path);

// Raw float grids ("F32G" magic, u32 width/height, little-endian f32 data);
// used for the debug cost/weight dumps.
void save_float_grid(const FloatGrid& grid, const std::string& path);
FloatGrid load_float_grid(const std::string& path);

} // namespace cellcut

#endif
