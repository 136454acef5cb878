#include "cellcut.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "cellcut/config.hpp"
#include "cellcut/error.hpp"
#include "cellcut/eval.hpp"
#include "cellcut/ferns.hpp"
#include "cellcut/image_io.hpp"
#include "cellcut/pipeline.hpp"
#include "cellcut/seeds.hpp"

struct cellcut_config {
    cellcut::PipelineConfig cfg;
};
struct cellcut_image {
    cellcut::Image img;
};
struct cellcut_labelmap {
    cellcut::LabelMap map;
};
struct cellcut_model {
    cellcut::FernsModel model;
};
struct cellcut_segmentation {
    cellcut::SegmentationOutput out;
    cellcut_labelmap labels; // handle exposed by cellcut_segmentation_labels
};

namespace {

thread_local std::string g_last_error;

cellcut_status status_of(cellcut::ErrorKind kind) {
    using cellcut::ErrorKind;
    switch (kind) {
    case ErrorKind::InvalidArgument: return CELLCUT_ERR_INVALID_ARGUMENT;
    case ErrorKind::Precondition: return CELLCUT_ERR_PRECONDITION;
    case ErrorKind::Io: return CELLCUT_ERR_IO;
    case ErrorKind::Format: return CELLCUT_ERR_FORMAT;
    case ErrorKind::Internal: break;
    }
    return CELLCUT_ERR_INTERNAL;
}

template <typename Fn>
cellcut_status wrap(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return CELLCUT_OK;
    } catch (const cellcut::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CELLCUT_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CELLCUT_ERR_INTERNAL;
    }
}

cellcut_status fail_invalid(const char* msg) noexcept {
    g_last_error = msg;
    return CELLCUT_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<cellcut::TrainPair> collect_pairs(const cellcut_image* const* images,
                                              const cellcut_labelmap* const* annotations,
                                              size_t count) {
    if (count == 0)
        throw cellcut::InvalidArgumentError("training needs at least one image/annotation pair");
    std::vector<cellcut::TrainPair> pairs;
    pairs.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        if (!images[i] || !annotations[i])
            throw cellcut::InvalidArgumentError("training pair " + std::to_string(i) +
                                                " is NULL");
        pairs.push_back({&images[i]->img, &annotations[i]->map});
    }
    return pairs;
}

} // namespace

extern "C" {

const char* cellcut_version(void) {
    return "0.1.0";
}

const char* cellcut_last_error(void) {
    return g_last_error.c_str();
}

void cellcut_string_free(char* s) {
    std::free(s);
}

void cellcut_buffer_free(void* p) {
    std::free(p);
}

/* ---- configuration ------------------------------------------------------ */

cellcut_config* cellcut_config_create(void) {
    return new (std::nothrow) cellcut_config{};
}

void cellcut_config_destroy(cellcut_config* cfg) {
    delete cfg;
}

cellcut_status cellcut_config_load(const char* path, cellcut_config** out) {
    if (!path || !out)
        return fail_invalid("cellcut_config_load: NULL argument");
    return wrap([&] {
        auto handle = std::make_unique<cellcut_config>();
        handle->cfg = cellcut::PipelineConfig::load(path);
        *out = handle.release();
    });
}

cellcut_status cellcut_config_save(const cellcut_config* cfg, const char* path) {
    if (!cfg || !path)
        return fail_invalid("cellcut_config_save: NULL argument");
    return wrap([&] { cfg->cfg.save(path); });
}

cellcut_status cellcut_config_set(cellcut_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value)
        return fail_invalid("cellcut_config_set: NULL argument");
    return wrap([&] { cfg->cfg.set(key, value); });
}

cellcut_status cellcut_config_get(const cellcut_config* cfg, const char* key,
                                  char* buf, size_t bufsize) {
    if (!cfg || !key || !buf)
        return fail_invalid("cellcut_config_get: NULL argument");
    return wrap([&] {
        const std::string v = cfg->cfg.get(key);
        if (v.size() + 1 > bufsize)
            throw cellcut::InvalidArgumentError("cellcut_config_get: buffer too small");
        std::memcpy(buf, v.c_str(), v.size() + 1);
    });
}

cellcut_status cellcut_config_validate(const cellcut_config* cfg) {
    if (!cfg)
        return fail_invalid("cellcut_config_validate: NULL argument");
    return wrap([&] { cfg->cfg.validate(); });
}

cellcut_status cellcut_config_dump(const cellcut_config* cfg, char** out) {
    if (!cfg || !out)
        return fail_invalid("cellcut_config_dump: NULL argument");
    return wrap([&] { *out = copy_string(cfg->cfg.dump()); });
}

/* ---- images ------------------------------------------------------------- */

cellcut_status cellcut_image_load(const char* path, cellcut_image** out) {
    if (!path || !out)
        return fail_invalid("cellcut_image_load: NULL argument");
    return wrap([&] {
        auto handle = std::make_unique<cellcut_image>();
        handle->img = cellcut::load_image(path);
        *out = handle.release();
    });
}

cellcut_status cellcut_image_save(const cellcut_image* img, const char* path, int bit_depth) {
    if (!img || !path)
        return fail_invalid("cellcut_image_save: NULL argument");
    return wrap([&] { cellcut::save_image(img->img, path, bit_depth); });
}

cellcut_status cellcut_image_from_data(int width, int height, const float* data,
                                       cellcut_image** out) {
    if (!data || !out)
        return fail_invalid("cellcut_image_from_data: NULL argument");
    return wrap([&] {
        if (width < 1 || height < 1)
            throw cellcut::InvalidArgumentError("cellcut_image_from_data: bad dimensions");
        auto handle = std::make_unique<cellcut_image>();
        handle->img = cellcut::Image(width, height);
        std::memcpy(handle->img.data().data(), data,
                    sizeof(float) * std::size_t(width) * height);
        *out = handle.release();
    });
}

void cellcut_image_destroy(cellcut_image* img) {
    delete img;
}

int cellcut_image_width(const cellcut_image* img) {
    return img ? img->img.width() : 0;
}

int cellcut_image_height(const cellcut_image* img) {
    return img ? img->img.height() : 0;
}

const float* cellcut_image_data(const cellcut_image* img) {
    return img ? img->img.data().data() : nullptr;
}

/* ---- label maps --------------------------------------------------------- */

cellcut_status cellcut_labelmap_load(const char* path, cellcut_labelmap** out) {
    if (!path || !out)
        return fail_invalid("cellcut_labelmap_load: NULL argument");
    return wrap([&] {
        auto handle = std::make_unique<cellcut_labelmap>();
        handle->map = cellcut::load_label_map(path);
        *out = handle.release();
    });
}

cellcut_status cellcut_labelmap_save(const cellcut_labelmap* map, const char* path) {
    if (!map || !path)
        return fail_invalid("cellcut_labelmap_save: NULL argument");
    return wrap([&] { cellcut::save_label_map(map->map, path); });
}

cellcut_status cellcut_labelmap_from_data(int width, int height, const uint32_t* data,
                                          cellcut_labelmap** out) {
    if (!data || !out)
        return fail_invalid("cellcut_labelmap_from_data: NULL argument");
    return wrap([&] {
        if (width < 1 || height < 1)
            throw cellcut::InvalidArgumentError("cellcut_labelmap_from_data: bad dimensions");
        auto handle = std::make_unique<cellcut_labelmap>();
        handle->map = cellcut::LabelMap(width, height);
        std::memcpy(handle->map.labels().data(), data,
                    sizeof(uint32_t) * std::size_t(width) * height);
        *out = handle.release();
    });
}

void cellcut_labelmap_destroy(cellcut_labelmap* map) {
    delete map;
}

int cellcut_labelmap_width(const cellcut_labelmap* map) {
    return map ? map->map.width() : 0;
}

int cellcut_labelmap_height(const cellcut_labelmap* map) {
    return map ? map->map.height() : 0;
}

uint32_t cellcut_labelmap_max(const cellcut_labelmap* map) {
    return map ? map->map.max_label() : 0;
}

const uint32_t* cellcut_labelmap_data(const cellcut_labelmap* map) {
    return map ? map->map.labels().data() : nullptr;
}

/* ---- synthetic scenes --------------------------------------------------- */

cellcut_status cellcut_synth_scene(const cellcut_config* cfg, uint64_t rng_seed,
                                   cellcut_image** image, cellcut_labelmap** truth) {
    if (!cfg || !image || !truth)
        return fail_invalid("cellcut_synth_scene: NULL argument");
    return wrap([&] {
        cellcut::SyntheticScene scene = cellcut::generate_scene(cfg->cfg.scene, rng_seed);
        auto img = std::make_unique<cellcut_image>();
        auto map = std::make_unique<cellcut_labelmap>();
        img->img = std::move(scene.image);
        map->map = std::move(scene.ground_truth);
        *image = img.release();
        *truth = map.release();
    });
}

/* ---- training & models -------------------------------------------------- */

cellcut_status cellcut_train(const cellcut_config* cfg, const cellcut_image* const* images,
                             const cellcut_labelmap* const* annotations, size_t count,
                             uint64_t class_counts[3], cellcut_model** out) {
    if (!cfg || !images || !annotations || !out)
        return fail_invalid("cellcut_train: NULL argument");
    return wrap([&] {
        const auto pairs = collect_pairs(images, annotations, count);
        std::array<std::size_t, cellcut::kNumClasses> counts{};
        auto handle = std::make_unique<cellcut_model>();
        handle->model = cellcut::train_from_pairs(pairs, cfg->cfg, &counts);
        if (class_counts)
            for (int c = 0; c < 3; ++c)
                class_counts[c] = counts[c];
        *out = handle.release();
    });
}

cellcut_status cellcut_cross_validate(const cellcut_config* cfg,
                                      const cellcut_image* const* images,
                                      const cellcut_labelmap* const* annotations, size_t count,
                                      int folds, double* mean_accuracy, double* std_accuracy) {
    if (!cfg || !images || !annotations)
        return fail_invalid("cellcut_cross_validate: NULL argument");
    return wrap([&] {
        cfg->cfg.validate();
        const auto pairs = collect_pairs(images, annotations, count);
        std::vector<cellcut::ClassMasks> masks;
        masks.reserve(pairs.size());
        for (const auto& p : pairs)
            masks.push_back(cellcut::derive_class_masks(*p.annotation, cfg->cfg.erosion_radius,
                                                        cfg->cfg.dilation_radius));
        std::vector<cellcut::AnnotatedMasks> sources;
        sources.reserve(pairs.size());
        for (size_t i = 0; i < pairs.size(); ++i)
            sources.push_back({&masks[i], pairs[i].image});
        const cellcut::CrossValidationResult res =
            cellcut::cross_validate(sources, folds, cfg->cfg.fern_config());
        if (mean_accuracy)
            *mean_accuracy = res.mean_accuracy;
        if (std_accuracy)
            *std_accuracy = res.std_accuracy;
    });
}

cellcut_status cellcut_model_save(const cellcut_model* model, const char* path) {
    if (!model || !path)
        return fail_invalid("cellcut_model_save: NULL argument");
    return wrap([&] { model->model.save(path); });
}

cellcut_status cellcut_model_load(const char* path, cellcut_model** out) {
    if (!path || !out)
        return fail_invalid("cellcut_model_load: NULL argument");
    return wrap([&] {
        auto handle = std::make_unique<cellcut_model>();
        handle->model = cellcut::FernsModel::load(path);
        *out = handle.release();
    });
}

void cellcut_model_destroy(cellcut_model* model) {
    delete model;
}

cellcut_status cellcut_model_info(const cellcut_model* model, int* num_ferns,
                                  int* tests_per_fern, int* window_radius) {
    if (!model)
        return fail_invalid("cellcut_model_info: NULL argument");
    if (num_ferns)
        *num_ferns = model->model.num_ferns();
    if (tests_per_fern)
        *tests_per_fern = model->model.tests_per_fern();
    if (window_radius)
        *window_radius = model->model.window_radius();
    g_last_error.clear();
    return CELLCUT_OK;
}

cellcut_status cellcut_model_class_entropy(const cellcut_model* model, double entropy[3]) {
    if (!model || !entropy)
        return fail_invalid("cellcut_model_class_entropy: NULL argument");
    return wrap([&] {
        const auto& ferns = model->model.ferns();
        if (ferns.empty())
            throw cellcut::PreconditionError("model has no ferns");
        for (int c = 0; c < cellcut::kNumClasses; ++c) {
            double sum = 0.0;
            for (const auto& fern : ferns) {
                double h = 0.0;
                const std::size_t rows = fern.table.size() / cellcut::kNumClasses;
                for (std::size_t o = 0; o < rows; ++o) {
                    const double p = std::exp(double(fern.table[o * cellcut::kNumClasses + c]));
                    if (p > 0.0)
                        h -= p * std::log2(p);
                }
                sum += h;
            }
            entropy[c] = sum / double(ferns.size());
        }
    });
}

/* ---- segmentation ------------------------------------------------------- */

cellcut_status cellcut_segment(const cellcut_model* model, const cellcut_image* image,
                               const cellcut_config* cfg, const int32_t* seed_xy,
                               size_t seed_count, cellcut_segmentation** out) {
    if (!model || !image || !cfg || !out)
        return fail_invalid("cellcut_segment: NULL argument");
    if (!seed_xy && seed_count > 0)
        return fail_invalid("cellcut_segment: seed_count without seed_xy");
    return wrap([&] {
        cellcut::SeedSet manual;
        const cellcut::SeedSet* override_ptr = nullptr;
        if (seed_xy) {
            for (size_t i = 0; i < seed_count; ++i) {
                const int x = seed_xy[2 * i];
                const int y = seed_xy[2 * i + 1];
                if (!image->img.in_bounds(x, y))
                    throw cellcut::InvalidArgumentError(
                        "cellcut_segment: seed " + std::to_string(i) + " out of bounds");
                manual.seeds.push_back({{x, y}, 0.0f, 0});
            }
            override_ptr = &manual;
        }
        auto handle = std::make_unique<cellcut_segmentation>();
        handle->out = cellcut::segment_image(model->model, image->img, cfg->cfg, override_ptr);
        handle->labels.map = std::move(handle->out.labels);
        *out = handle.release();
    });
}

void cellcut_segmentation_destroy(cellcut_segmentation* seg) {
    delete seg;
}

const cellcut_labelmap* cellcut_segmentation_labels(const cellcut_segmentation* seg) {
    return seg ? &seg->labels : nullptr;
}

uint32_t cellcut_segmentation_num_labels(const cellcut_segmentation* seg) {
    return seg ? seg->out.num_labels : 0;
}

int cellcut_segmentation_converged(const cellcut_segmentation* seg) {
    return seg && seg->out.opt.converged ? 1 : 0;
}

size_t cellcut_segmentation_seed_count(const cellcut_segmentation* seg) {
    return seg ? seg->out.seeds.size() : 0;
}

cellcut_status cellcut_segmentation_seed(const cellcut_segmentation* seg, size_t index,
                                         int* x, int* y) {
    if (!seg)
        return fail_invalid("cellcut_segmentation_seed: NULL argument");
    if (index >= seg->out.seeds.size())
        return fail_invalid("cellcut_segmentation_seed: index out of range");
    if (x)
        *x = seg->out.seeds.seeds[index].center.x;
    if (y)
        *y = seg->out.seeds.seeds[index].center.y;
    g_last_error.clear();
    return CELLCUT_OK;
}

cellcut_status cellcut_segmentation_trace(const cellcut_segmentation* seg,
                                          const double** values, size_t* count) {
    if (!seg || !values || !count)
        return fail_invalid("cellcut_segmentation_trace: NULL argument");
    *values = seg->out.opt.energy_trace.data();
    *count = seg->out.opt.energy_trace.size();
    g_last_error.clear();
    return CELLCUT_OK;
}

cellcut_status cellcut_segmentation_trace_csv(const cellcut_segmentation* seg, char** out) {
    if (!seg || !out)
        return fail_invalid("cellcut_segmentation_trace_csv: NULL argument");
    return wrap([&] { *out = copy_string(cellcut::trace_csv(seg->out.opt, seg->out.num_labels)); });
}

size_t cellcut_segmentation_sweep_count(const cellcut_segmentation* seg) {
    return seg ? seg->out.opt.sweeps.size() : 0;
}

cellcut_status cellcut_segmentation_sweep(const cellcut_segmentation* seg, size_t index,
                                          int* sweep, double* energy, uint32_t* labels_in_use) {
    if (!seg)
        return fail_invalid("cellcut_segmentation_sweep: NULL argument");
    if (index >= seg->out.opt.sweeps.size())
        return fail_invalid("cellcut_segmentation_sweep: index out of range");
    const cellcut::SweepStat& s = seg->out.opt.sweeps[index];
    if (sweep)
        *sweep = s.sweep;
    if (energy)
        *energy = s.energy;
    if (labels_in_use)
        *labels_in_use = s.labels_in_use;
    g_last_error.clear();
    return CELLCUT_OK;
}

cellcut_status cellcut_segmentation_posterior(const cellcut_segmentation* seg, int pixel_class,
                                              float* buf, size_t bufsize) {
    if (!seg || !buf)
        return fail_invalid("cellcut_segmentation_posterior: NULL argument");
    return wrap([&] {
        if (pixel_class < 0 || pixel_class >= cellcut::kNumClasses)
            throw cellcut::InvalidArgumentError("pixel_class must be 0, 1 or 2");
        const cellcut::ScoreMaps& scores = seg->out.scores;
        const std::size_t n = std::size_t(scores.width) * scores.height;
        if (bufsize < n)
            throw cellcut::InvalidArgumentError("cellcut_segmentation_posterior: buffer too small");
        for (std::size_t p = 0; p < n; ++p)
            buf[p] = scores.post[p * cellcut::kNumClasses + pixel_class];
    });
}

cellcut_status cellcut_segmentation_save_posteriors(const cellcut_segmentation* seg,
                                                    const char* prefix) {
    if (!seg || !prefix)
        return fail_invalid("cellcut_segmentation_save_posteriors: NULL argument");
    return wrap([&] {
        static const char* names[3] = {"interior", "border", "exterior"};
        for (int c = 0; c < cellcut::kNumClasses; ++c) {
            const cellcut::FloatGrid grid =
                seg->out.scores.posterior_channel(cellcut::PixelClass(c));
            cellcut::save_float_grid(grid, std::string(prefix) + "_post_" + names[c] + ".f32");
        }
    });
}

cellcut_status cellcut_write_overlay(const cellcut_image* image, const cellcut_labelmap* labels,
                                     const char* path) {
    if (!image || !labels || !path)
        return fail_invalid("cellcut_write_overlay: NULL argument");
    return wrap([&] {
        const cellcut::RgbImage overlay = cellcut::render_overlay(image->img, labels->map);
        cellcut::save_rgb_png(overlay, path);
    });
}

/* ---- evaluation --------------------------------------------------------- */

cellcut_status cellcut_metrics(const cellcut_labelmap* predicted, const cellcut_labelmap* truth,
                               double* mean_dice, int* splits, int* merges,
                               uint32_t* n_labels_used) {
    if (!predicted || !truth)
        return fail_invalid("cellcut_metrics: NULL argument");
    return wrap([&] {
        const cellcut::SegmentationMetrics m =
            cellcut::segmentation_metrics(predicted->map, truth->map);
        if (mean_dice)
            *mean_dice = m.mean_dice;
        if (splits)
            *splits = m.splits;
        if (merges)
            *merges = m.merges;
        if (n_labels_used)
            *n_labels_used = m.n_labels_used;
    });
}

cellcut_status cellcut_metrics_report(const cellcut_labelmap* predicted,
                                      const cellcut_labelmap* truth, int as_json, char** out) {
    if (!predicted || !truth || !out)
        return fail_invalid("cellcut_metrics_report: NULL argument");
    return wrap([&] {
        const cellcut::SegmentationMetrics m =
            cellcut::segmentation_metrics(predicted->map, truth->map);
        *out = copy_string(as_json ? cellcut::metrics_json(&m, nullptr)
                                   : cellcut::metrics_text(&m, nullptr));
    });
}

/* ---- misc files --------------------------------------------------------- */

cellcut_status cellcut_seed_file_load(const char* path, int width, int height,
                                      int32_t** xy_out, size_t* count_out) {
    if (!path || !xy_out || !count_out)
        return fail_invalid("cellcut_seed_file_load: NULL argument");
    return wrap([&] {
        const cellcut::SeedSet seeds = cellcut::load_seed_file(path, width, height);
        const size_t bytes = std::max<size_t>(1, sizeof(int32_t) * 2 * seeds.size());
        int32_t* xy = static_cast<int32_t*>(std::malloc(bytes));
        if (!xy)
            throw std::bad_alloc();
        for (size_t i = 0; i < seeds.size(); ++i) {
            xy[2 * i] = seeds.seeds[i].center.x;
            xy[2 * i + 1] = seeds.seeds[i].center.y;
        }
        *xy_out = xy;
        *count_out = seeds.size();
    });
}

cellcut_status cellcut_float_grid_stats(const char* path, int* width, int* height,
                                        double* min_value, double* max_value,
                                        double* mean_value) {
    if (!path)
        return fail_invalid("cellcut_float_grid_stats: NULL argument");
    return wrap([&] {
        const cellcut::FloatGrid g = cellcut::load_float_grid(path);
        double mn = 0.0, mx = 0.0, sum = 0.0;
        if (!g.v.empty()) {
            mn = mx = g.v[0];
            for (float f : g.v) {
                mn = std::min(mn, double(f));
                mx = std::max(mx, double(f));
                sum += f;
            }
        }
        if (width)
            *width = g.width;
        if (height)
            *height = g.height;
        if (min_value)
            *min_value = mn;
        if (max_value)
            *max_value = mx;
        if (mean_value)
            *mean_value = g.v.empty() ? 0.0 : sum / double(g.v.size());
    });
}

} // extern "C"
