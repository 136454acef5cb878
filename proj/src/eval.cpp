#include "cellcut/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"

#include "cellcut/error.hpp"

namespace cellcut {

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

namespace {

double aggregate_radius(const SceneParams& p) {
    return std::sqrt(p.cell_count * p.mean_cell_area / 3.14159265358979323846);
}

} // namespace

void SceneParams::validate() const {
    if (width < 64 || height < 64)
        throw InvalidArgumentError("scene: width/height must be at least 64");
    if (cell_count < 1)
        throw InvalidArgumentError("scene: cell_count must be positive");
    if (mean_cell_area < 100.0)
        throw InvalidArgumentError("scene: mean_cell_area must be at least 100");
    if (membrane_width < 1)
        throw InvalidArgumentError("scene: membrane_width must be at least 1");
    for (double b : {membrane_brightness, interior_brightness, background_brightness})
        if (b < 0.0 || b > 1.0)
            throw InvalidArgumentError("scene: brightness values must lie in [0,1]");
    if (texture_sigma < 0.0 || blur_sigma < 0.0 || noise_sigma < 0.0)
        throw InvalidArgumentError("scene: sigmas must be nonnegative");
    const double radius = aggregate_radius(*this);
    if (radius + membrane_width + 4.0 > 0.5 * std::min(width, height))
        throw InvalidArgumentError("scene: cell_count * mean_cell_area does not fit the frame");
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0)
        return img;
    const int r = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i)
        sum += kernel[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& k : kernel)
        k /= sum;

    Image tmp(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += kernel[i + r] * img.sample_clamped(x + i, y);
            tmp.at(x, y) = float(acc);
        }
    Image out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += kernel[i + r] * tmp.sample_clamped(x, y + i);
            out.at(x, y) = float(acc);
        }
    return out;
}

SyntheticScene generate_scene(const SceneParams& params, std::uint64_t rng_seed) {
    params.validate();
    const int w = params.width;
    const int h = params.height;
    const int n = params.cell_count;
    const double cx = 0.5 * w;
    const double cy = 0.5 * h;
    const double radius = aggregate_radius(params);
    const double center_radius = radius - params.membrane_width - 2.0;
    const double min_separation = std::max(6.0, 0.35 * std::sqrt(params.mean_cell_area));

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_point = [&] {
        const double rr = center_radius * std::sqrt(unit(rng));
        const double th = 2.0 * 3.14159265358979323846 * unit(rng);
        return std::pair<double, double>{cx + rr * std::cos(th), cy + rr * std::sin(th)};
    };

    // Best-candidate sampling keeps centers spread out; if even the best
    // candidate sits too close, the aggregate cannot hold this many cells.
    std::vector<std::pair<double, double>> centers;
    centers.push_back(draw_point());
    while (int(centers.size()) < n) {
        std::pair<double, double> best{};
        double best_d2 = -1.0;
        for (int c = 0; c < 40; ++c) {
            const auto cand = draw_point();
            double d2 = std::numeric_limits<double>::max();
            for (const auto& e : centers) {
                const double dx = cand.first - e.first;
                const double dy = cand.second - e.second;
                d2 = std::min(d2, dx * dx + dy * dy);
            }
            if (d2 > best_d2) {
                best_d2 = d2;
                best = cand;
            }
        }
        if (best_d2 < min_separation * min_separation)
            throw InvalidArgumentError("scene: cannot fit " + std::to_string(n) +
                                       " cells in the aggregate at this mean_cell_area");
        centers.push_back(best);
    }

    // Voronoi partition of the aggregate disc; ties go to the lowest id.
    LabelMap truth(w, h);
    std::vector<std::size_t> cell_size(std::size_t(n) + 1, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            if (dx * dx + dy * dy > radius * radius)
                continue;
            std::uint32_t best_id = 1;
            double best_d2 = std::numeric_limits<double>::max();
            for (int i = 0; i < n; ++i) {
                const double ex = x - centers[i].first;
                const double ey = y - centers[i].second;
                const double d2 = ex * ex + ey * ey;
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best_id = std::uint32_t(i + 1);
                }
            }
            truth.at(x, y) = best_id;
            ++cell_size[best_id];
        }
    for (int i = 1; i <= n; ++i)
        if (cell_size[i] == 0)
            throw InvalidArgumentError("scene: cannot fit " + std::to_string(n) +
                                       " cells in the aggregate at this mean_cell_area");

    // Membrane ridge: cell pixels touching a different region (or the
    // background), thickened to the requested width.
    BinaryMask boundary(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::uint32_t id = truth.at(x, y);
            if (id == 0)
                continue;
            bool edge = false;
            for (int dy = -1; dy <= 1 && !edge; ++dy)
                for (int dx = -1; dx <= 1 && !edge; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                        edge = true;
                    else if (truth.at(nx, ny) != id)
                        edge = true;
                }
            if (edge)
                boundary.set(x, y, true);
        }
    const BinaryMask membrane = dilate(boundary, params.membrane_width - 1);

    Image img(w, h);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = params.background_brightness;
            if (truth.at(x, y) != 0) {
                v = params.interior_brightness;
                if (params.texture_sigma > 0.0)
                    v += params.texture_sigma * gauss(rng);
            }
            img.at(x, y) = float(std::clamp(v, 0.0, 1.0));
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (membrane.at(x, y))
                img.at(x, y) = float(params.membrane_brightness);

    img = gaussian_blur(img, params.blur_sigma);
    if (params.noise_sigma > 0.0) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(x, y) = float(std::clamp(img.at(x, y) + params.noise_sigma * gauss(rng),
                                                0.0, 1.0));
    }

    return SyntheticScene{std::move(img), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Segmentation metrics
// ---------------------------------------------------------------------------

SegmentationMetrics segmentation_metrics(const LabelMap& predicted, const LabelMap& truth) {
    if (predicted.width() != truth.width() || predicted.height() != truth.height())
        throw InvalidArgumentError("segmentation_metrics: label map sizes differ");

    const std::uint32_t max_t = truth.max_label();
    const std::uint32_t max_p = predicted.max_label();
    std::vector<std::uint64_t> truth_size(std::size_t(max_t) + 1, 0);
    std::vector<std::uint64_t> pred_size(std::size_t(max_p) + 1, 0);
    std::unordered_map<std::uint64_t, std::uint64_t> inter;
    inter.reserve(1024);
    for (std::size_t i = 0; i < truth.labels().size(); ++i) {
        const std::uint32_t t = truth.labels()[i];
        const std::uint32_t p = predicted.labels()[i];
        ++truth_size[t];
        ++pred_size[p];
        if (t != 0)
            ++inter[(std::uint64_t(t) << 32) | p];
    }

    // Per truth cell: all overlapping nonbackground labels, sorted by id.
    std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> by_truth(max_t + 1);
    // Per predicted label: truth cells it claims at >= 20%.
    std::vector<int> claims(std::size_t(max_p) + 1, 0);
    for (const auto& [key, count] : inter) {
        const std::uint32_t t = std::uint32_t(key >> 32);
        const std::uint32_t p = std::uint32_t(key & 0xffffffffu);
        if (p == 0)
            continue;
        by_truth[t].emplace_back(p, count);
        if (5 * count >= truth_size[t])
            ++claims[p];
    }

    SegmentationMetrics m;
    double dice_sum = 0.0;
    for (std::uint32_t t = 1; t <= max_t; ++t) {
        if (truth_size[t] == 0)
            continue;
        ++m.truth_cells;
        auto& overlaps = by_truth[t];
        std::sort(overlaps.begin(), overlaps.end());
        CellOverlap cell;
        cell.truth_id = t;
        std::uint64_t best = 0;
        int covering = 0;
        for (const auto& [p, count] : overlaps) {
            if (count > best) {
                best = count;
                cell.matched_label = p;
            }
            if (5 * count >= truth_size[t])
                ++covering;
        }
        if (best > 0)
            cell.dice = 2.0 * double(best) /
                        double(truth_size[t] + pred_size[cell.matched_label]);
        if (covering >= 2)
            ++m.splits;
        dice_sum += cell.dice;
        m.per_cell.push_back(cell);
    }
    if (m.truth_cells > 0)
        m.mean_dice = dice_sum / m.truth_cells;
    for (std::uint32_t p = 1; p <= max_p; ++p) {
        if (pred_size[p] > 0)
            ++m.n_labels_used;
        if (claims[p] >= 2)
            ++m.merges;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
        for (std::uint64_t c : row)
            t += c;
    return t;
}

double ConfusionMatrix::accuracy() const {
    const std::uint64_t t = total();
    if (t == 0)
        return 0.0;
    std::uint64_t diag = 0;
    for (int i = 0; i < 3; ++i)
        diag += counts[i][i];
    return double(diag) / double(t);
}

CrossValidationResult cross_validate(const std::vector<AnnotatedMasks>& sources, int k,
                                     const FernTrainingConfig& config) {
    if (k < 2)
        throw InvalidArgumentError("cross_validate: need at least 2 folds");
    if (config.orientations < 1)
        throw InvalidArgumentError("cross_validate: orientations must be positive");

    // One balanced base pool at orientation 0; rotations enter on the
    // training side only.
    std::vector<TrainingSample> base =
        sample_balanced_pooled(sources, int(config.per_class), 1, config.rng_seed);

    // The pool is grouped by class with random order inside each class, so
    // round-robin assignment stratifies the folds.
    std::vector<int> fold_of(base.size());
    std::array<int, kNumClasses> class_count{};
    for (std::size_t i = 0; i < base.size(); ++i)
        fold_of[i] = class_count[int(base[i].cls)]++ % k;
    for (int c = 0; c < kNumClasses; ++c)
        if (class_count[c] < k)
            throw PreconditionError(std::string("cross_validate: not enough ") +
                                    pixel_class_name(PixelClass(c)) +
                                    " samples to fill every fold");

    constexpr double kTau = 2.0 * 3.14159265358979323846;
    CrossValidationResult res;
    std::vector<double> accuracies;
    std::vector<TrainingSample> train;
    for (int f = 0; f < k; ++f) {
        train.clear();
        for (std::size_t i = 0; i < base.size(); ++i) {
            if (fold_of[i] == f)
                continue;
            for (int a = 0; a < config.orientations; ++a) {
                TrainingSample s = base[i];
                s.orientation = kTau * a / config.orientations;
                train.push_back(s);
            }
        }
        FernsModel model = FernsModel::generate(config.num_ferns, config.tests_per_fern,
                                                config.window_radius, config.rng_seed);
        model.train(train);

        ConfusionMatrix cm;
        for (std::size_t i = 0; i < base.size(); ++i) {
            if (fold_of[i] != f)
                continue;
            const PixelClass pred = classify(
                posteriors(model.log_scores(*base[i].source, base[i].x, base[i].y)));
            cm.add(base[i].cls, pred);
        }
        accuracies.push_back(cm.accuracy());
        res.folds.push_back(cm);
    }

    const double mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / k;
    double var = 0.0;
    for (double a : accuracies)
        var += (a - mean) * (a - mean);
    res.mean_accuracy = mean;
    res.std_accuracy = std::sqrt(var / k);
    return res;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string metrics_text(const SegmentationMetrics* seg, const CrossValidationResult* cv) {
    std::ostringstream out;
    out.precision(10);
    if (seg) {
        out << "mean_dice = " << seg->mean_dice << "\n"
            << "splits = " << seg->splits << "\n"
            << "merges = " << seg->merges << "\n"
            << "n_labels_used = " << seg->n_labels_used << "\n"
            << "truth_cells = " << seg->truth_cells << "\n";
    }
    if (cv) {
        out << "accuracy_mean = " << cv->mean_accuracy << "\n"
            << "accuracy_std = " << cv->std_accuracy << "\n";
    }
    return out.str();
}

std::string metrics_json(const SegmentationMetrics* seg, const CrossValidationResult* cv) {
    nlohmann::json j;
    if (seg) {
        j["mean_dice"] = seg->mean_dice;
        j["splits"] = seg->splits;
        j["merges"] = seg->merges;
        j["n_labels_used"] = seg->n_labels_used;
        j["truth_cells"] = seg->truth_cells;
    }
    if (cv) {
        j["accuracy_mean"] = cv->mean_accuracy;
        j["accuracy_std"] = cv->std_accuracy;
    }
    return j.dump(2) + "\n";
}

} // namespace cellcut
