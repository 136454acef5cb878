#include "cellcut/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace cellcut {
namespace {

bool has_suffix(const std::string& s, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    if (s.size() < n) return false;
    std::string tail = s.substr(s.size() - n);
    for (auto& c : tail) c = char(std::tolower(static_cast<unsigned char>(c)));
    return tail == suffix;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open '" + path + "'");
    return f;
}

// Raw 16-bit rows come back big-endian from libpng unless swapped; we keep
// them in a u16 buffer in host order.
struct GrayBuffer {
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    std::vector<std::uint16_t> samples;
};

GrayBuffer read_gray_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw FormatError("'" + path + "' is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng init failed");
    }
    std::vector<png_bytep> row_ptrs;
    GrayBuffer out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("PNG decode failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png); // little-endian host order
    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);

    out.width = int(png_get_image_width(png, info));
    out.height = int(png_get_image_height(png, info));
    out.bit_depth = depth;
    out.samples.resize(std::size_t(out.width) * out.height);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> rows(rowbytes * out.height);
    row_ptrs.resize(out.height);
    for (int y = 0; y < out.height; ++y) row_ptrs[y] = rows.data() + rowbytes * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    for (int y = 0; y < out.height; ++y) {
        const unsigned char* row = rows.data() + rowbytes * y;
        for (int x = 0; x < out.width; ++x) {
            std::uint16_t v;
            if (depth == 16) {
                std::memcpy(&v, row + 2 * x, 2);
            } else {
                v = row[x];
            }
            out.samples[std::size_t(y) * out.width + x] = v;
        }
    }
    return out;
}

void write_gray_png(const std::string& path, int width, int height, int bit_depth,
                    const std::uint16_t* samples) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);

    std::vector<unsigned char> row(std::size_t(width) * (bit_depth == 16 ? 2 : 1));
    for (int y = 0; y < height; ++y) {
        const std::uint16_t* src = samples + std::size_t(y) * width;
        if (bit_depth == 16) {
            std::memcpy(row.data(), src, std::size_t(width) * 2);
        } else {
            for (int x = 0; x < width; ++x) row[x] = static_cast<unsigned char>(src[x]);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

GrayBuffer read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string magic;
    in >> magic;
    if (magic != "P5") throw FormatError("'" + path + "': expected PGM magic P5, got '" + magic + "'");

    auto next_token = [&]() -> long {
        // PGM headers allow '#' comments between tokens
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        return v;
    };

    const long w = next_token(), h = next_token(), maxval = next_token();
    if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw FormatError("'" + path + "': malformed PGM header");
    in.get(); // single whitespace after maxval

    GrayBuffer out;
    out.width = int(w);
    out.height = int(h);
    out.bit_depth = maxval > 255 ? 16 : 8;
    out.samples.resize(std::size_t(w) * h);

    const std::size_t n = out.samples.size();
    if (out.bit_depth == 8) {
        std::vector<unsigned char> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(n));
        if (std::size_t(in.gcount()) != n) throw FormatError("'" + path + "': truncated PGM data");
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
    } else {
        std::vector<unsigned char> raw(n * 2);
        in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(n * 2));
        if (std::size_t(in.gcount()) != n * 2) throw FormatError("'" + path + "': truncated PGM data");
        for (std::size_t i = 0; i < n; ++i)
            out.samples[i] = std::uint16_t((raw[2 * i] << 8) | raw[2 * i + 1]); // big-endian per spec
    }
    return out;
}

void write_pgm(const std::string& path, int width, int height, int bit_depth,
               const std::uint16_t* samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const int maxval = bit_depth == 16 ? 65535 : 255;
    out << "P5\n" << width << " " << height << "\n" << maxval << "\n";
    const std::size_t n = std::size_t(width) * height;
    if (bit_depth == 8) {
        std::vector<unsigned char> raw(n);
        for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<unsigned char>(samples[i]);
        out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(n));
    } else {
        std::vector<unsigned char> raw(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
            raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
        }
        out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(n * 2));
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

Image to_image(const GrayBuffer& buf) {
    Image img(buf.width, buf.height);
    const float scale = 1.0f / float(buf.bit_depth == 16 ? 65535 : 255);
    for (std::size_t i = 0; i < buf.samples.size(); ++i) img.data()[i] = buf.samples[i] * scale;
    return img;
}

std::vector<std::uint16_t> quantize(const Image& img, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw InvalidArgumentError("bit depth must be 8 or 16");
    const float maxval = bit_depth == 16 ? 65535.0f : 255.0f;
    std::vector<std::uint16_t> out(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        float v = std::clamp(img.data()[i], 0.0f, 1.0f);
        out[i] = std::uint16_t(std::lround(v * maxval));
    }
    return out;
}

} // namespace

Image load_image(const std::string& path) {
    if (has_suffix(path, ".pgm")) return to_image(read_pgm(path));
    return to_image(read_gray_png(path));
}

void save_image_png(const Image& img, const std::string& path, int bit_depth) {
    auto q = quantize(img, bit_depth);
    write_gray_png(path, img.width(), img.height(), bit_depth, q.data());
}

void save_image_pgm(const Image& img, const std::string& path, int bit_depth) {
    auto q = quantize(img, bit_depth);
    write_pgm(path, img.width(), img.height(), bit_depth, q.data());
}

void save_image(const Image& img, const std::string& path, int bit_depth) {
    if (has_suffix(path, ".pgm"))
        save_image_pgm(img, path, bit_depth);
    else
        save_image_png(img, path, bit_depth);
}

LabelMap load_label_map(const std::string& path) {
    GrayBuffer buf = read_gray_png(path);
    LabelMap map(buf.width, buf.height);
    for (std::size_t i = 0; i < buf.samples.size(); ++i) map.labels()[i] = buf.samples[i];
    return map;
}

void save_label_map(const LabelMap& map, const std::string& path) {
    std::vector<std::uint16_t> samples(map.labels().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (map.labels()[i] > 65535)
            throw InvalidArgumentError("label id exceeds 16-bit range");
        samples[i] = std::uint16_t(map.labels()[i]);
    }
    write_gray_png(path, map.width(), map.height(), 16, samples.data());
}

void save_rgb_png(const RgbImage& img, const std::string& path) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.rgb.data() + std::size_t(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_float_grid(const FloatGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::uint32_t w = std::uint32_t(grid.width), h = std::uint32_t(grid.height);
    out.write("F32G", 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(grid.v.data()),
              std::streamsize(grid.v.size() * sizeof(float)));
    if (!out) throw IoError("short write to '" + path + "'");
}

FloatGrid load_float_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "F32G", 4) != 0)
        throw FormatError("'" + path + "': bad float grid magic (want F32G)");
    std::uint32_t w = 0, h = 0;
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in || w == 0 || h == 0 || std::size_t(w) * h > (1u << 30))
        throw FormatError("'" + path + "': bad float grid header");
    FloatGrid grid{int(w), int(h)};
    in.read(reinterpret_cast<char*>(grid.v.data()), std::streamsize(grid.v.size() * sizeof(float)));
    if (std::size_t(in.gcount()) != grid.v.size() * sizeof(float))
        throw FormatError("'" + path + "': truncated float grid");
    return grid;
}

} // namespace cellcut
