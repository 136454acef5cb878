#include "cellcut/ferns.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace cellcut {
namespace {

constexpr char kMagic[4] = {'F', 'R', 'N', '1'};
constexpr int kMaxTestsPerFern = 20; // 2^S table rows

void append_u32(std::string& buf, std::uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
    buf.append(b, 4);
}

std::uint32_t read_u32(const std::string& buf, std::size_t& pos) {
    if (pos + 4 > buf.size()) throw FormatError("model file truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

} // namespace

const char* pixel_class_name(PixelClass c) {
    switch (c) {
        case PixelClass::Interior: return "interior";
        case PixelClass::Border: return "border";
        case PixelClass::Exterior: return "exterior";
    }
    return "?";
}

FernsModel FernsModel::generate(int num_ferns, int tests_per_fern, int window_radius,
                                std::uint64_t rng_seed) {
    if (num_ferns < 1) throw InvalidArgumentError("need at least one fern");
    if (tests_per_fern < 1 || tests_per_fern > kMaxTestsPerFern)
        throw InvalidArgumentError("tests per fern must be in [1, 20]");
    if (window_radius < 1 || window_radius > 127)
        throw InvalidArgumentError("window radius must be in [1, 127]");

    FernsModel m;
    m.tests_per_fern_ = tests_per_fern;
    m.window_radius_ = window_radius;
    m.ferns_.resize(std::size_t(num_ferns));

    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<int> off(-window_radius, window_radius);
    const float uniform = -float(tests_per_fern) * std::log(2.0f);
    const std::size_t rows = std::size_t(1) << tests_per_fern;

    for (auto& fern : m.ferns_) {
        fern.tests.resize(std::size_t(tests_per_fern));
        for (auto& t : fern.tests) {
            t.dyA = std::int8_t(off(rng));
            t.dxA = std::int8_t(off(rng));
            t.dyB = std::int8_t(off(rng));
            t.dxB = std::int8_t(off(rng));
        }
        fern.table.assign(rows * kNumClasses, uniform);
    }
    return m;
}

std::uint32_t FernsModel::eval_fern(const Image& img, int cx, int cy, double orientation,
                                    const Fern& fern) const {
    std::uint32_t outcome = 0;
    if (orientation == 0.0) {
        for (std::size_t j = 0; j < fern.tests.size(); ++j) {
            const auto& t = fern.tests[j];
            const float a = img.sample_clamped(cx + t.dxA, cy + t.dyA);
            const float b = img.sample_clamped(cx + t.dxB, cy + t.dyB);
            outcome |= std::uint32_t(a > b) << j;
        }
        return outcome;
    }
    const double c = std::cos(orientation), s = std::sin(orientation);
    for (std::size_t j = 0; j < fern.tests.size(); ++j) {
        const auto& t = fern.tests[j];
        const int axr = int(std::lround(t.dxA * c - t.dyA * s));
        const int ayr = int(std::lround(t.dxA * s + t.dyA * c));
        const int bxr = int(std::lround(t.dxB * c - t.dyB * s));
        const int byr = int(std::lround(t.dxB * s + t.dyB * c));
        const float a = img.sample_clamped(cx + axr, cy + ayr);
        const float b = img.sample_clamped(cx + bxr, cy + byr);
        outcome |= std::uint32_t(a > b) << j;
    }
    return outcome;
}

void FernsModel::train(const std::vector<TrainingSample>& samples) {
    std::array<std::size_t, kNumClasses> class_counts{};
    for (const auto& s : samples) {
        if (!s.source) throw InvalidArgumentError("training sample without source image");
        ++class_counts[int(s.cls)];
    }
    for (int c = 0; c < kNumClasses; ++c)
        if (class_counts[c] == 0)
            throw PreconditionError(std::string("no training samples for class ") +
                                    pixel_class_name(PixelClass(c)));

    const std::size_t rows = std::size_t(num_outcomes());
    std::vector<std::uint32_t> counts(rows * kNumClasses);
    for (auto& fern : ferns_) {
        std::fill(counts.begin(), counts.end(), 0u);
        for (const auto& s : samples) {
            const std::uint32_t outcome = eval_fern(*s.source, s.x, s.y, s.orientation, fern);
            ++counts[outcome * kNumClasses + int(s.cls)];
        }
        for (std::size_t o = 0; o < rows; ++o)
            for (int c = 0; c < kNumClasses; ++c)
                fern.table[o * kNumClasses + c] =
                    std::log(float(counts[o * kNumClasses + c] + 1) /
                             float(class_counts[c] + rows));
    }
    trained_ = true;
}

std::array<double, kNumClasses> FernsModel::log_scores(const Image& img, int x, int y) const {
    if (!trained_) throw PreconditionError("model is untrained");
    std::array<double, kNumClasses> s{};
    for (const auto& fern : ferns_) {
        const std::uint32_t outcome = eval_fern(img, x, y, 0.0, fern);
        const float* row = &fern.table[std::size_t(outcome) * kNumClasses];
        s[0] += row[0];
        s[1] += row[1];
        s[2] += row[2];
    }
    return s;
}

std::array<double, kNumClasses> posteriors(const std::array<double, kNumClasses>& log_scores) {
    const double m = std::max({log_scores[0], log_scores[1], log_scores[2]});
    std::array<double, kNumClasses> p;
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        p[c] = std::exp(log_scores[c] - m);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return p;
}

PixelClass classify(const std::array<double, kNumClasses>& scores) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (scores[c] > scores[best]) best = c;
    return PixelClass(best);
}

std::array<double, kNumClasses> ScoreMaps::log_scores_at(int x, int y) const {
    const std::size_t i = (std::size_t(y) * width + x) * kNumClasses;
    return {log_scores[i], log_scores[i + 1], log_scores[i + 2]};
}

std::array<double, kNumClasses> ScoreMaps::posteriors_at(int x, int y) const {
    const std::size_t i = (std::size_t(y) * width + x) * kNumClasses;
    return {post[i], post[i + 1], post[i + 2]};
}

FloatGrid ScoreMaps::posterior_channel(PixelClass c) const {
    FloatGrid g(width, height);
    for (std::size_t p = 0; p < g.v.size(); ++p) g.v[p] = post[p * kNumClasses + int(c)];
    return g;
}

ScoreMaps score_image(const FernsModel& model, const Image& img) {
    if (!model.trained()) throw PreconditionError("model is untrained");
    ScoreMaps maps;
    maps.width = img.width();
    maps.height = img.height();
    maps.log_scores.resize(std::size_t(img.size()) * kNumClasses);
    maps.post.resize(maps.log_scores.size());

    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto s = model.log_scores(img, x, y);
            const auto p = posteriors(s);
            const std::size_t i = (std::size_t(y) * img.width() + x) * kNumClasses;
            for (int c = 0; c < kNumClasses; ++c) {
                maps.log_scores[i + c] = float(s[c]);
                maps.post[i + c] = float(p[c]);
            }
        }
    }
    return maps;
}

LabelMap classify_map(const ScoreMaps& scores) {
    LabelMap out(scores.width, scores.height);
    for (int y = 0; y < scores.height; ++y)
        for (int x = 0; x < scores.width; ++x)
            out.at(x, y) = std::uint32_t(classify(scores.log_scores_at(x, y)));
    return out;
}

void FernsModel::save(const std::string& path) const {
    std::string buf;
    buf.append(kMagic, 4);
    append_u32(buf, std::uint32_t(num_ferns()));
    append_u32(buf, std::uint32_t(tests_per_fern_));
    append_u32(buf, std::uint32_t(window_radius_));
    append_u32(buf, std::uint32_t(kNumClasses));
    for (const auto& fern : ferns_) {
        for (const auto& t : fern.tests) {
            const char offs[4] = {char(t.dyA), char(t.dxA), char(t.dyB), char(t.dxB)};
            buf.append(offs, 4);
        }
        static_assert(sizeof(float) == 4);
        buf.append(reinterpret_cast<const char*>(fern.table.data()), fern.table.size() * 4);
    }
    std::uint32_t crc = std::uint32_t(
        crc32(0, reinterpret_cast<const Bytef*>(buf.data()), uInt(buf.size())));
    append_u32(buf, crc);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

FernsModel FernsModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("'" + path + "': bad model magic (want FRN1)");
    if (buf.size() < 8 + 16)
        throw FormatError("'" + path + "': model file truncated");

    const std::uint32_t stored_crc = [&] {
        std::size_t pos = buf.size() - 4;
        return read_u32(buf, pos);
    }();
    const std::uint32_t computed = std::uint32_t(
        crc32(0, reinterpret_cast<const Bytef*>(buf.data()), uInt(buf.size() - 4)));
    if (stored_crc != computed)
        throw FormatError("'" + path + "': model CRC mismatch");

    std::size_t pos = 4;
    const std::uint32_t n = read_u32(buf, pos);
    const std::uint32_t s = read_u32(buf, pos);
    const std::uint32_t l = read_u32(buf, pos);
    const std::uint32_t h = read_u32(buf, pos);
    if (n < 1 || s < 1 || s > kMaxTestsPerFern || l < 1 || l > 127 || h != kNumClasses)
        throw FormatError("'" + path + "': inconsistent model header");

    const std::size_t rows = std::size_t(1) << s;
    const std::size_t per_fern = std::size_t(s) * 4 + rows * h * 4;
    if (buf.size() != 20 + std::size_t(n) * per_fern + 4)
        throw FormatError("'" + path + "': model size does not match header");

    FernsModel m;
    m.tests_per_fern_ = int(s);
    m.window_radius_ = int(l);
    m.ferns_.resize(n);
    for (auto& fern : m.ferns_) {
        fern.tests.resize(s);
        for (auto& t : fern.tests) {
            t.dyA = std::int8_t(buf[pos]);
            t.dxA = std::int8_t(buf[pos + 1]);
            t.dyB = std::int8_t(buf[pos + 2]);
            t.dxB = std::int8_t(buf[pos + 3]);
            const int r = m.window_radius_;
            if (t.dyA < -r || t.dyA > r || t.dxA < -r || t.dxA > r || t.dyB < -r ||
                t.dyB > r || t.dxB < -r || t.dxB > r)
                throw FormatError("'" + path + "': test offset outside window radius");
            pos += 4;
        }
        fern.table.resize(rows * h);
        std::memcpy(fern.table.data(), buf.data() + pos, fern.table.size() * 4);
        pos += fern.table.size() * 4;
        for (float v : fern.table)
            if (!std::isfinite(v)) throw FormatError("'" + path + "': non-finite table entry");
    }
    m.trained_ = true;
    return m;
}

} // namespace cellcut
