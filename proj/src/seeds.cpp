#include "cellcut/seeds.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cellcut {

SeedSet extract_seeds(const FloatGrid& interior_posterior, const std::vector<double>& thresholds,
                      std::size_t max_cell_area, std::size_t min_area) {
    for (std::size_t i = 0; i + 1 < thresholds.size(); ++i)
        if (thresholds[i] <= thresholds[i + 1])
            throw InvalidArgumentError("thresholds must be strictly decreasing");
    if (min_area >= max_cell_area)
        throw InvalidArgumentError("min area must be below max cell area");

    const int w = interior_posterior.width, h = interior_posterior.height;
    SeedSet out;

    for (double t : thresholds) {
        BinaryMask above(w, h, false);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (interior_posterior.at(x, y) >= t) above.set(x, y, true);

        const ComponentLabels comps = connected_components(above, 8);
        if (comps.count() == 0) continue;

        // per-component centroid accumulators and prior-seed hits
        const std::size_t n = comps.count();
        std::vector<double> sum_x(n, 0.0), sum_y(n, 0.0);
        std::vector<std::uint8_t> has_prior(n, 0);
        for (const auto& seed : out.seeds) {
            const std::uint32_t id = comps.labels.at(seed.center.x, seed.center.y);
            if (id > 0) has_prior[id - 1] = 1;
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint32_t id = comps.labels.at(x, y);
                if (id == 0) continue;
                sum_x[id - 1] += x;
                sum_y[id - 1] += y;
            }
        }

        std::vector<std::uint8_t> accepted(n, 0);
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t size = comps.sizes[k];
            if (!has_prior[k] && size >= min_area && size < max_cell_area) {
                accepted[k] = 1;
                any = true;
            }
        }
        if (!any) continue;

        // snap each accepted centroid to the nearest pixel of its component
        std::vector<Coord> best(n, {-1, -1});
        std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint32_t id = comps.labels.at(x, y);
                if (id == 0 || !accepted[id - 1]) continue;
                const std::size_t k = id - 1;
                const double cx = sum_x[k] / double(comps.sizes[k]);
                const double cy = sum_y[k] / double(comps.sizes[k]);
                const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                if (d < best_d[k]) {
                    best_d[k] = d;
                    best[k] = {x, y};
                }
            }
        }
        for (std::size_t k = 0; k < n; ++k)
            if (accepted[k]) out.seeds.push_back({best[k], float(t), comps.sizes[k]});
    }

    out.empty_warning = out.seeds.empty();
    return out;
}

std::vector<double> default_thresholds(double high, double low, double step) {
    if (step <= 0 || high <= low) throw InvalidArgumentError("bad threshold sweep parameters");
    std::vector<double> out;
    for (double t = high; t >= low - 1e-12; t -= step) out.push_back(t);
    return out;
}

SeedSet load_seed_file(const std::string& path, int width, int height) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open seeds file '" + path + "'");
    SeedSet out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        long x, y;
        if (!(ss >> x)) continue; // blank line
        if (!(ss >> y))
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected 'x y'");
        if (x < 0 || x >= width || y < 0 || y >= height)
            throw InvalidArgumentError(path + ":" + std::to_string(lineno) +
                                       ": seed out of image bounds");
        out.seeds.push_back({{int(x), int(y)}, 1.0f, 1});
    }
    out.empty_warning = out.seeds.empty();
    return out;
}

} // namespace cellcut
