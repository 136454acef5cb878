#include "cellcut/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "cellcut/error.hpp"
#include "cellcut/seeds.hpp"

namespace cellcut {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& v) {
    long long out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end)
        throw InvalidArgumentError("expected an integer, got \"" + v + "\"");
    return out;
}

std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end)
        throw InvalidArgumentError("expected an unsigned integer, got \"" + v + "\"");
    return out;
}

double parse_double(const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end)
        throw InvalidArgumentError("expected a number, got \"" + v + "\"");
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v); // shortest round-trip form
    (void)ec;
    return std::string(buf, p);
}

struct KeyDesc {
    const char* name;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<KeyDesc>& keys() {
    auto int_key = [](const char* name, int PipelineConfig::*field) {
        return KeyDesc{name,
                       [field](PipelineConfig& c, const std::string& v) { c.*field = int(parse_int(v)); },
                       [field](const PipelineConfig& c) { return std::to_string(c.*field); }};
    };
    auto double_key = [](const char* name, double PipelineConfig::*field) {
        return KeyDesc{name,
                       [field](PipelineConfig& c, const std::string& v) { c.*field = parse_double(v); },
                       [field](const PipelineConfig& c) { return format_double(c.*field); }};
    };
    auto scene_int = [](const char* name, int SceneParams::*field) {
        return KeyDesc{name,
                       [field](PipelineConfig& c, const std::string& v) { c.scene.*field = int(parse_int(v)); },
                       [field](const PipelineConfig& c) { return std::to_string(c.scene.*field); }};
    };
    auto scene_double = [](const char* name, double SceneParams::*field) {
        return KeyDesc{name,
                       [field](PipelineConfig& c, const std::string& v) { c.scene.*field = parse_double(v); },
                       [field](const PipelineConfig& c) { return format_double(c.scene.*field); }};
    };
    static const std::vector<KeyDesc> table = {
        int_key("num_ferns", &PipelineConfig::num_ferns),
        int_key("tests_per_fern", &PipelineConfig::tests_per_fern),
        int_key("window_radius", &PipelineConfig::window_radius),
        int_key("orientations", &PipelineConfig::orientations),
        int_key("per_class", &PipelineConfig::per_class),
        int_key("erosion_radius", &PipelineConfig::erosion_radius),
        int_key("dilation_radius", &PipelineConfig::dilation_radius),
        double_key("threshold_high", &PipelineConfig::threshold_high),
        double_key("threshold_low", &PipelineConfig::threshold_low),
        double_key("threshold_step", &PipelineConfig::threshold_step),
        int_key("min_area", &PipelineConfig::min_area),
        int_key("max_cell_area", &PipelineConfig::max_cell_area),
        int_key("line_length", &PipelineConfig::line_length),
        double_key("alpha_w", &PipelineConfig::alpha_w),
        double_key("beta_w", &PipelineConfig::beta_w),
        double_key("label_cost", &PipelineConfig::label_cost),
        int_key("line_directions", &PipelineConfig::line_directions),
        double_key("max_seed_distance", &PipelineConfig::max_seed_distance),
        int_key("max_sweeps", &PipelineConfig::max_sweeps),
        scene_int("scene_width", &SceneParams::width),
        scene_int("scene_height", &SceneParams::height),
        scene_int("scene_cell_count", &SceneParams::cell_count),
        scene_double("scene_mean_cell_area", &SceneParams::mean_cell_area),
        scene_int("scene_membrane_width", &SceneParams::membrane_width),
        scene_double("scene_membrane_brightness", &SceneParams::membrane_brightness),
        scene_double("scene_interior_brightness", &SceneParams::interior_brightness),
        scene_double("scene_background_brightness", &SceneParams::background_brightness),
        scene_double("scene_texture_sigma", &SceneParams::texture_sigma),
        scene_double("scene_blur_sigma", &SceneParams::blur_sigma),
        scene_double("scene_noise_sigma", &SceneParams::noise_sigma),
        KeyDesc{"rng_seed",
                [](PipelineConfig& c, const std::string& v) { c.rng_seed = parse_u64(v); },
                [](const PipelineConfig& c) { return std::to_string(c.rng_seed); }},
    };
    return table;
}

const KeyDesc* find_key(const std::string& name) {
    for (const KeyDesc& k : keys())
        if (name == k.name)
            return &k;
    return nullptr;
}

} // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    const KeyDesc* k = find_key(key);
    if (!k)
        throw InvalidArgumentError("unknown configuration key \"" + key + "\"");
    k->set(*this, value);
}

std::string PipelineConfig::get(const std::string& key) const {
    const KeyDesc* k = find_key(key);
    if (!k)
        throw InvalidArgumentError("unknown configuration key \"" + key + "\"");
    return k->get(*this);
}

void PipelineConfig::validate() const {
    if (num_ferns < 1)
        throw InvalidArgumentError("num_ferns must be positive");
    if (tests_per_fern < 1 || tests_per_fern > 20)
        throw InvalidArgumentError("tests_per_fern must lie in [1, 20]");
    if (window_radius < 1 || window_radius > 127)
        throw InvalidArgumentError("window_radius must lie in [1, 127]");
    if (orientations < 1)
        throw InvalidArgumentError("orientations must be positive");
    if (per_class < 1)
        throw InvalidArgumentError("per_class must be positive");
    if (erosion_radius < 0)
        throw InvalidArgumentError("erosion_radius must be nonnegative");
    if (dilation_radius < 1)
        throw InvalidArgumentError("dilation_radius must be positive");
    if (!(threshold_low > 0.0) || !(threshold_high < 1.0) || threshold_low > threshold_high)
        throw InvalidArgumentError("seed thresholds must satisfy 0 < low <= high < 1");
    if (!(threshold_step > 0.0))
        throw InvalidArgumentError("threshold_step must be positive");
    if (min_area < 1)
        throw InvalidArgumentError("min_area must be positive");
    if (max_cell_area <= min_area)
        throw InvalidArgumentError("max_cell_area must exceed min_area");
    energy_params().validate();
    if (max_sweeps < 1)
        throw InvalidArgumentError("max_sweeps must be positive");
    scene.validate();
}

EnergyParams PipelineConfig::energy_params() const {
    EnergyParams p;
    p.line_length = line_length;
    p.alpha_w = alpha_w;
    p.beta_w = beta_w;
    p.label_cost = label_cost;
    p.line_directions = line_directions;
    p.max_seed_distance = max_seed_distance;
    return p;
}

FernTrainingConfig PipelineConfig::fern_config() const {
    FernTrainingConfig c;
    c.num_ferns = num_ferns;
    c.tests_per_fern = tests_per_fern;
    c.window_radius = window_radius;
    c.orientations = orientations;
    c.per_class = std::size_t(per_class);
    c.rng_seed = rng_seed;
    return c;
}

std::vector<double> PipelineConfig::seed_thresholds() const {
    return default_thresholds(threshold_high, threshold_low, threshold_step);
}

std::string PipelineConfig::dump() const {
    std::ostringstream out;
    out << "# cellcut pipeline configuration\n";
    for (const KeyDesc& k : keys())
        out << k.name << " = " << k.get(*this) << "\n";
    return out.str();
}

void PipelineConfig::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open \"" + path + "\" for writing");
    f << dump();
    if (!f.flush())
        throw IoError("failed writing \"" + path + "\"");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open config \"" + path + "\"");
    PipelineConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const Error& e) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw FormatError(path + ": " + e.what());
    }
    return cfg;
}

} // namespace cellcut
