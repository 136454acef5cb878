#ifndef CELLCUT_FERNS_HPP
#define CELLCUT_FERNS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cellcut/image.hpp"

namespace cellcut {

enum class PixelClass : int { Interior = 0, Border = 1, Exterior = 2 };
inline constexpr int kNumClasses = 3;
const char* pixel_class_name(PixelClass c);

// One intensity comparison: bit = [I(center + R*offsetA) > I(center + R*offsetB)].
struct BinaryTest {
    std::int8_t dyA = 0, dxA = 0;
    std::int8_t dyB = 0, dxB = 0;
};

// A fern is an ordered set of S binary tests plus a log class-conditional
// table with one row per joint test outcome.
struct Fern {
    std::vector<BinaryTest> tests;
    // table[outcome * kNumClasses + c] = log P(F = outcome | C = c)
    std::vector<float> table;
};

struct TrainingSample {
    const Image* source = nullptr;
    int x = 0;
    int y = 0;
    PixelClass cls = PixelClass::Interior;
    double orientation = 0.0; // radians
};

class FernsModel {
public:
    FernsModel() = default;

    int num_ferns() const { return int(ferns_.size()); }
    int tests_per_fern() const { return tests_per_fern_; }
    int window_radius() const { return window_radius_; }
    int num_outcomes() const { return 1 << tests_per_fern_; }
    bool trained() const { return trained_; }

    const std::vector<Fern>& ferns() const { return ferns_; }

    // Untrained model with uniform tables; offsets drawn i.i.d. uniform on the
    // (2l+1)^2 window grid. Deterministic for a given rng seed.
    static FernsModel generate(int num_ferns, int tests_per_fern, int window_radius,
                               std::uint64_t rng_seed);

    // Laplace-smoothed table fit: entry = log((count + 1) / (class_count + 2^S)).
    // Every class needs at least one sample.
    void train(const std::vector<TrainingSample>& samples);

    // Joint outcome of one fern at a pixel; offsets are rotated by the given
    // orientation, rounded to the nearest pixel, read with clamp-to-edge.
    // Test j contributes bit j (test 0 = least significant).
    std::uint32_t eval_fern(const Image& img, int cx, int cy, double orientation,
                            const Fern& fern) const;

    // Summed log class-conditionals at a pixel, inference orientation 0.
    std::array<double, kNumClasses> log_scores(const Image& img, int x, int y) const;

    bool operator==(const FernsModel&) const = default;

    void save(const std::string& path) const;
    static FernsModel load(const std::string& path);

private:
    std::vector<Fern> ferns_;
    int tests_per_fern_ = 0;
    int window_radius_ = 0;
    bool trained_ = false;
};

// Softmax of the log-scores (max-shifted, overflow safe). Order-preserving,
// sums to 1.
std::array<double, kNumClasses> posteriors(const std::array<double, kNumClasses>& log_scores);

// Argmax with ties broken by the fixed class order interior < border < exterior.
PixelClass classify(const std::array<double, kNumClasses>& scores);

struct ScoreMaps {
    int width = 0;
    int height = 0;
    // 3 values per pixel, class-major-in-pixel: [p * 3 + c]
    std::vector<float> log_scores;
    std::vector<float> post;

    std::array<double, kNumClasses> log_scores_at(int x, int y) const;
    std::array<double, kNumClasses> posteriors_at(int x, int y) const;
    float posterior(int x, int y, PixelClass c) const {
        return post[(std::size_t(y) * width + x) * kNumClasses + int(c)];
    }
    FloatGrid posterior_channel(PixelClass c) const;
};

ScoreMaps score_image(const FernsModel& model, const Image& img);
LabelMap classify_map(const ScoreMaps& scores);

} // namespace cellcut

#endif
