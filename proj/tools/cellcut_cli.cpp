// Command-line frontend for the cellcut shared library. Talks exclusively to
// the C API in cellcut.h.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cellcut.h"

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(cellcut_status status, const std::string& context) {
    if (status != CELLCUT_OK)
        throw CliError(context + ": " + cellcut_last_error());
}

// Collects every file produced by the current invocation; unless commit() is
// called, all of them are removed again so failures leave nothing partial.
class OutputTracker {
public:
    ~OutputTracker() {
        if (committed_)
            return;
        for (const std::string& p : written_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }
    void add(const std::string& path) { written_.push_back(path); }
    void commit() { committed_ = true; }

private:
    std::vector<std::string> written_;
    bool committed_ = false;
};

struct ConfigHandle {
    cellcut_config* cfg = nullptr;
    ~ConfigHandle() { cellcut_config_destroy(cfg); }
};
struct ImageHandle {
    cellcut_image* img = nullptr;
    ~ImageHandle() { cellcut_image_destroy(img); }
};
struct LabelMapHandle {
    cellcut_labelmap* map = nullptr;
    ~LabelMapHandle() { cellcut_labelmap_destroy(map); }
};
struct ModelHandle {
    cellcut_model* model = nullptr;
    ~ModelHandle() { cellcut_model_destroy(model); }
};
struct SegmentationHandle {
    cellcut_segmentation* seg = nullptr;
    ~SegmentationHandle() { cellcut_segmentation_destroy(seg); }
};
struct CString {
    char* s = nullptr;
    ~CString() { cellcut_string_free(s); }
};

// Shared flags: config file, repeated --set key=value overrides, --rng-seed.
struct ConfigFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> rng_seed;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file (key = value lines)");
        cmd->add_option("--set", overrides, "override one configuration key, e.g. --set num_ferns=100");
        cmd->add_option("--rng-seed", rng_seed, "random seed (overrides the config file)");
    }

    void build(ConfigHandle& out) const {
        if (!config_path.empty())
            check(cellcut_config_load(config_path.c_str(), &out.cfg), "loading config");
        else if (!(out.cfg = cellcut_config_create()))
            throw CliError("out of memory");
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw CliError("--set expects key=value, got \"" + kv + "\"");
            check(cellcut_config_set(out.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
                  "--set " + kv);
        }
        if (rng_seed)
            check(cellcut_config_set(out.cfg, "rng_seed", std::to_string(*rng_seed).c_str()),
                  "--rng-seed");
        check(cellcut_config_validate(out.cfg), "configuration");
    }
};

void write_text_file(const std::string& path, const std::string& content, OutputTracker& outputs) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw CliError("cannot open \"" + path + "\" for writing");
    outputs.add(path);
    f << content;
    if (!f.flush())
        throw CliError("failed writing \"" + path + "\"");
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const std::vector<std::string>& image_paths,
              const std::vector<std::string>& annotation_paths,
              const std::vector<std::string>& excludes, const ConfigFlags& flags, int cv_folds,
              const std::string& out_prefix) {
    if (image_paths.size() != annotation_paths.size())
        throw CliError("--image and --annotation must be given the same number of times");

    ConfigHandle cfg;
    flags.build(cfg);

    std::vector<ImageHandle> images(image_paths.size());
    std::vector<LabelMapHandle> annotations(image_paths.size());
    std::vector<const cellcut_image*> image_ptrs;
    std::vector<const cellcut_labelmap*> annotation_ptrs;
    for (std::size_t i = 0; i < image_paths.size(); ++i) {
        const bool excluded = std::find(excludes.begin(), excludes.end(), annotation_paths[i]) !=
                              excludes.end();
        if (excluded) {
            std::cout << "excluding " << annotation_paths[i] << "\n";
            continue;
        }
        check(cellcut_image_load(image_paths[i].c_str(), &images[i].img),
              "reading " + image_paths[i]);
        check(cellcut_labelmap_load(annotation_paths[i].c_str(), &annotations[i].map),
              "reading " + annotation_paths[i]);
        if (cellcut_image_width(images[i].img) != cellcut_labelmap_width(annotations[i].map) ||
            cellcut_image_height(images[i].img) != cellcut_labelmap_height(annotations[i].map))
            throw CliError(image_paths[i] + " and " + annotation_paths[i] + " differ in size");
        image_ptrs.push_back(images[i].img);
        annotation_ptrs.push_back(annotations[i].map);
    }
    if (image_ptrs.empty())
        throw CliError("no training pairs left after exclusions");

    OutputTracker outputs;
    std::uint64_t class_counts[3] = {0, 0, 0};
    ModelHandle model;
    check(cellcut_train(cfg.cfg, image_ptrs.data(), annotation_ptrs.data(), image_ptrs.size(),
                        class_counts, &model.model),
          "training");
    std::cout << "training samples per class: interior " << class_counts[0] << ", border "
              << class_counts[1] << ", exterior " << class_counts[2] << "\n";

    const std::string model_path = out_prefix + ".frn";
    outputs.add(model_path);
    check(cellcut_model_save(model.model, model_path.c_str()), "writing " + model_path);
    std::cout << "model written to " << model_path << "\n";

    if (cv_folds > 0) {
        double mean = 0.0, sd = 0.0;
        check(cellcut_cross_validate(cfg.cfg, image_ptrs.data(), annotation_ptrs.data(),
                                     image_ptrs.size(), cv_folds, &mean, &sd),
              "cross-validation");
        std::cout << "accuracy_mean = " << mean << "\n"
                  << "accuracy_std = " << sd << "\n";
    }
    outputs.commit();
    return 0;
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

int cmd_segment(const std::vector<std::string>& image_paths, const std::string& model_path,
                const std::string& seeds_file, bool dump_scores, const ConfigFlags& flags,
                const std::string& out_prefix) {
    ConfigHandle cfg;
    flags.build(cfg);

    ModelHandle model;
    check(cellcut_model_load(model_path.c_str(), &model.model), "loading model " + model_path);

    OutputTracker outputs;
    for (const std::string& image_path : image_paths) {
        const std::string prefix = image_paths.size() == 1
                                       ? out_prefix
                                       : out_prefix + "_" + stem_of(image_path);
        ImageHandle image;
        check(cellcut_image_load(image_path.c_str(), &image.img), "reading " + image_path);

        int32_t* seed_xy = nullptr;
        size_t seed_count = 0;
        if (!seeds_file.empty())
            check(cellcut_seed_file_load(seeds_file.c_str(), cellcut_image_width(image.img),
                                         cellcut_image_height(image.img), &seed_xy, &seed_count),
                  "reading " + seeds_file);
        std::unique_ptr<int32_t, void (*)(void*)> seed_guard(seed_xy, cellcut_buffer_free);

        SegmentationHandle seg;
        check(cellcut_segment(model.model, image.img, cfg.cfg, seed_xy, seed_count, &seg.seg),
              "segmenting " + image_path);

        std::cout << image_path << ": " << cellcut_segmentation_seed_count(seg.seg) << " seeds, "
                  << cellcut_segmentation_num_labels(seg.seg) - 1 << " candidate labels\n";
        const size_t sweeps = cellcut_segmentation_sweep_count(seg.seg);
        for (size_t i = 0; i < sweeps; ++i) {
            int sweep = 0;
            double energy = 0.0;
            uint32_t in_use = 0;
            check(cellcut_segmentation_sweep(seg.seg, i, &sweep, &energy, &in_use), "sweep stats");
            std::cout << "  sweep " << sweep << ": energy " << energy << ", labels in use "
                      << in_use << "\n";
        }
        if (!cellcut_segmentation_converged(seg.seg))
            std::cout << "  stopped at the sweep limit without full convergence\n";

        const std::string labels_path = prefix + "_labels.png";
        outputs.add(labels_path);
        check(cellcut_labelmap_save(cellcut_segmentation_labels(seg.seg), labels_path.c_str()),
              "writing " + labels_path);

        const std::string overlay_path = prefix + "_overlay.png";
        outputs.add(overlay_path);
        check(cellcut_write_overlay(image.img, cellcut_segmentation_labels(seg.seg),
                                    overlay_path.c_str()),
              "writing " + overlay_path);

        CString csv;
        check(cellcut_segmentation_trace_csv(seg.seg, &csv.s), "formatting trace");
        write_text_file(prefix + "_trace.csv", csv.s, outputs);

        if (dump_scores) {
            check(cellcut_segmentation_save_posteriors(seg.seg, prefix.c_str()),
                  "writing posterior dumps");
            for (const char* name : {"interior", "border", "exterior"})
                outputs.add(prefix + "_post_" + name + ".f32");
        }
    }
    outputs.commit();
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& predicted_path, const std::string& truth_path,
             const std::string& out_prefix) {
    LabelMapHandle predicted, truth;
    check(cellcut_labelmap_load(predicted_path.c_str(), &predicted.map),
          "reading " + predicted_path);
    check(cellcut_labelmap_load(truth_path.c_str(), &truth.map), "reading " + truth_path);

    CString text, json;
    check(cellcut_metrics_report(predicted.map, truth.map, 0, &text.s), "computing metrics");
    check(cellcut_metrics_report(predicted.map, truth.map, 1, &json.s), "computing metrics");
    std::cout << text.s;

    OutputTracker outputs;
    if (!out_prefix.empty()) {
        write_text_file(out_prefix + "_metrics.txt", text.s, outputs);
        write_text_file(out_prefix + "_metrics.json", json.s, outputs);
    }
    outputs.commit();
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(int count, const ConfigFlags& flags, const std::string& out_prefix) {
    ConfigHandle cfg;
    flags.build(cfg);

    std::uint64_t seed = 0;
    {
        char buf[32];
        check(cellcut_config_get(cfg.cfg, "rng_seed", buf, sizeof buf), "rng_seed");
        seed = std::stoull(buf);
    }

    OutputTracker outputs;
    for (int i = 0; i < count; ++i) {
        std::string prefix = out_prefix;
        if (count > 1) {
            char idx[16];
            std::snprintf(idx, sizeof idx, "_%02d", i);
            prefix += idx;
        }
        ImageHandle image;
        LabelMapHandle truth;
        check(cellcut_synth_scene(cfg.cfg, seed + std::uint64_t(i), &image.img, &truth.map),
              "generating scene");
        const std::string image_path = prefix + "_image.png";
        outputs.add(image_path);
        check(cellcut_image_save(image.img, image_path.c_str(), 16), "writing " + image_path);
        const std::string truth_path = prefix + "_truth.png";
        outputs.add(truth_path);
        check(cellcut_labelmap_save(truth.map, truth_path.c_str()), "writing " + truth_path);
        std::cout << "wrote " << image_path << " and " << truth_path << "\n";
    }
    outputs.commit();
    return 0;
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

int cmd_inspect(const std::string& model_path, const std::string& grid_path,
                bool dump_default_config, const ConfigFlags& flags) {
    if (dump_default_config || !flags.config_path.empty() || !flags.overrides.empty()) {
        ConfigHandle cfg;
        flags.build(cfg);
        CString dump;
        check(cellcut_config_dump(cfg.cfg, &dump.s), "dumping config");
        std::cout << dump.s;
        return 0;
    }
    if (!model_path.empty()) {
        ModelHandle model;
        check(cellcut_model_load(model_path.c_str(), &model.model), "loading " + model_path);
        int n = 0, s = 0, l = 0;
        check(cellcut_model_info(model.model, &n, &s, &l), "model info");
        double entropy[3] = {0, 0, 0};
        check(cellcut_model_class_entropy(model.model, entropy), "model entropy");
        std::cout << "ferns = " << n << "\n"
                  << "tests_per_fern = " << s << "\n"
                  << "window_radius = " << l << "\n"
                  << "outcome_entropy_bits interior = " << entropy[0] << "\n"
                  << "outcome_entropy_bits border = " << entropy[1] << "\n"
                  << "outcome_entropy_bits exterior = " << entropy[2] << "\n";
        return 0;
    }
    if (!grid_path.empty()) {
        int w = 0, h = 0;
        double mn = 0, mx = 0, mean = 0;
        check(cellcut_float_grid_stats(grid_path.c_str(), &w, &h, &mn, &mx, &mean),
              "reading " + grid_path);
        std::cout << "size = " << w << "x" << h << "\n"
                  << "min = " << mn << "\n"
                  << "max = " << mx << "\n"
                  << "mean = " << mean << "\n";
        return 0;
    }
    throw CliError("inspect needs --model, --grid, --config or --dump-default-config");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cellcut: interior/border/exterior fern classification with "
                 "graph-cut cell segmentation"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "fit a ferns model from annotated images");
    std::vector<std::string> train_images, train_annotations, train_excludes;
    ConfigFlags train_flags;
    int cv_folds = 0;
    std::string train_out;
    train->add_option("--image", train_images, "input image (repeatable)")->required();
    train->add_option("--annotation", train_annotations,
                      "label map matching the image given in the same position (repeatable)")
        ->required();
    train->add_option("--exclude-annotation", train_excludes,
                      "drop the pair whose annotation has this path (leave-one-out)");
    train->add_option("--cv-folds", cv_folds, "also run k-fold cross-validation");
    train_flags.attach(train);
    train->add_option("--out", train_out, "output prefix; model goes to PREFIX.frn")->required();

    // segment
    auto* segment = app.add_subcommand("segment", "segment images with a trained model");
    std::vector<std::string> segment_images;
    std::string segment_model, seeds_file, segment_out;
    bool dump_scores = false;
    ConfigFlags segment_flags;
    segment->add_option("--image", segment_images, "image to segment (repeatable)")->required();
    segment->add_option("--model", segment_model, "trained .frn model")->required();
    segment->add_option("--seeds-file", seeds_file, "manual seeds, one \"x y\" pair per line");
    segment->add_flag("--dump-scores", dump_scores, "also write posterior .f32 dumps");
    segment_flags.attach(segment);
    segment->add_option("--out", segment_out, "output prefix")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "compare a predicted label map against ground truth");
    std::string eval_predicted, eval_truth, eval_out;
    eval->add_option("--predicted", eval_predicted, "predicted label map PNG")->required();
    eval->add_option("--truth", eval_truth, "ground-truth label map PNG")->required();
    eval->add_option("--out", eval_out, "also write PREFIX_metrics.{txt,json}");

    // synth
    auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
    int synth_count = 1;
    std::string synth_out;
    ConfigFlags synth_flags;
    synth->add_option("--count", synth_count, "number of scenes")->check(CLI::PositiveNumber);
    synth_flags.attach(synth);
    synth->add_option("--out", synth_out, "output prefix")->required();

    // inspect
    auto* inspect = app.add_subcommand("inspect", "describe models, score dumps or configs");
    std::string inspect_model, inspect_grid;
    bool dump_default = false;
    ConfigFlags inspect_flags;
    inspect->add_option("--model", inspect_model, "trained .frn model");
    inspect->add_option("--grid", inspect_grid, ".f32 score dump");
    inspect->add_flag("--dump-default-config", dump_default, "print the default configuration");
    inspect_flags.attach(inspect);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(train_images, train_annotations, train_excludes, train_flags,
                             cv_folds, train_out);
        if (segment->parsed())
            return cmd_segment(segment_images, segment_model, seeds_file, dump_scores,
                               segment_flags, segment_out);
        if (eval->parsed())
            return cmd_eval(eval_predicted, eval_truth, eval_out);
        if (synth->parsed())
            return cmd_synth(synth_count, synth_flags, synth_out);
        if (inspect->parsed())
            return cmd_inspect(inspect_model, inspect_grid, dump_default, inspect_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
