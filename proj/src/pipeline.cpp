#include "cellcut/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cellcut/energy.hpp"
#include "cellcut/error.hpp"
#include "cellcut/trainset.hpp"

namespace cellcut {

FernsModel train_from_pairs(const std::vector<TrainPair>& pairs, const PipelineConfig& cfg,
                            std::array<std::size_t, kNumClasses>* class_counts) {
    cfg.validate();
    if (pairs.empty())
        throw InvalidArgumentError("training needs at least one image/annotation pair");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const TrainPair& p = pairs[i];
        if (!p.image || !p.annotation)
            throw InvalidArgumentError("training pair " + std::to_string(i) + " is incomplete");
        if (p.image->width() != p.annotation->width() ||
            p.image->height() != p.annotation->height())
            throw InvalidArgumentError("training pair " + std::to_string(i) +
                                       ": image and annotation sizes differ");
    }

    std::vector<ClassMasks> masks;
    masks.reserve(pairs.size());
    for (const TrainPair& p : pairs)
        masks.push_back(derive_class_masks(*p.annotation, cfg.erosion_radius, cfg.dilation_radius));

    std::vector<AnnotatedMasks> sources;
    sources.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        sources.push_back({&masks[i], pairs[i].image});

    const std::vector<TrainingSample> samples =
        sample_balanced_pooled(sources, cfg.per_class, cfg.orientations, cfg.rng_seed);

    if (class_counts) {
        class_counts->fill(0);
        for (const TrainingSample& s : samples)
            if (s.orientation == 0.0)
                ++(*class_counts)[int(s.cls)];
    }

    FernsModel model = FernsModel::generate(cfg.num_ferns, cfg.tests_per_fern,
                                            cfg.window_radius, cfg.rng_seed);
    model.train(samples);
    return model;
}

SegmentationOutput segment_image(const FernsModel& model, const Image& image,
                                 const PipelineConfig& cfg, const SeedSet* seed_override) {
    cfg.validate();
    SegmentationOutput out;
    out.scores = score_image(model, image);

    if (seed_override) {
        out.seeds = *seed_override;
    } else {
        const FloatGrid interior = out.scores.posterior_channel(PixelClass::Interior);
        out.seeds = extract_seeds(interior, cfg.seed_thresholds(),
                                  std::size_t(cfg.max_cell_area), std::size_t(cfg.min_area));
    }

    const EnergyModel energy = build_energy(out.scores, out.seeds, cfg.energy_params());
    out.num_labels = energy.num_labels;
    out.opt = minimize(energy, initial_labeling(energy), cfg.max_sweeps);

    LabelMap labels(image.width(), image.height());
    labels.labels().assign(out.opt.labeling.ids.begin(), out.opt.labeling.ids.end());
    labels.compact();
    out.labels = std::move(labels);
    return out;
}

namespace {

// Fixed palette stepped by the golden ratio around the hue circle.
void label_color(std::uint32_t label, std::uint8_t rgb[3]) {
    const double hue = std::fmod(0.61803398874989485 * label, 1.0) * 6.0;
    const double s = 0.65, v = 1.0;
    const int i = int(hue) % 6;
    const double f = hue - std::floor(hue);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double r, g, b;
    switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
    }
    rgb[0] = std::uint8_t(std::lround(r * 255.0));
    rgb[1] = std::uint8_t(std::lround(g * 255.0));
    rgb[2] = std::uint8_t(std::lround(b * 255.0));
}

} // namespace

RgbImage render_overlay(const Image& image, const LabelMap& labels) {
    if (image.width() != labels.width() || image.height() != labels.height())
        throw InvalidArgumentError("render_overlay: image and label map sizes differ");
    RgbImage out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const double gray = 255.0 * std::clamp(double(image.at(x, y)), 0.0, 1.0);
            std::uint8_t* px = &out.rgb[(std::size_t(y) * image.width() + x) * 3];
            const std::uint32_t id = labels.at(x, y);
            if (id == 0) {
                px[0] = px[1] = px[2] = std::uint8_t(std::lround(gray));
                continue;
            }
            std::uint8_t color[3];
            label_color(id, color);
            bool boundary = false;
            for (const auto& [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const int nx = x + dx, ny = y + dy;
                if (labels.at(std::clamp(nx, 0, labels.width() - 1),
                              std::clamp(ny, 0, labels.height() - 1)) != id) {
                    boundary = true;
                    break;
                }
            }
            const double alpha = boundary ? 0.95 : 0.45;
            for (int c = 0; c < 3; ++c)
                px[c] = std::uint8_t(std::lround(alpha * color[c] + (1.0 - alpha) * gray));
        }
    return out;
}

std::string trace_csv(const MinimizeResult& opt, std::uint32_t num_labels) {
    std::ostringstream out;
    out << "move,sweep,alpha,energy\n";
    char buf[64];
    for (std::size_t i = 0; i < opt.energy_trace.size(); ++i) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, opt.energy_trace[i]);
        (void)ec;
        const std::string energy(buf, p);
        if (i == 0) {
            out << "0,0,," << energy << "\n";
        } else {
            const std::size_t move = i - 1;
            out << i << "," << (move / num_labels + 1) << "," << (move % num_labels) << ","
                << energy << "\n";
        }
    }
    return out.str();
}

} // namespace cellcut
