#include "cellcut/energy.hpp"

#include <cmath>
#include <numbers>

namespace cellcut {
namespace {

inline double border_integrand(const ScoreMaps& s, int x, int y) {
    const std::size_t i = (std::size_t(y) * s.width + x) * kNumClasses;
    const double pi = s.post[i], pb = s.post[i + 1], pe = s.post[i + 2];
    return std::max({0.0, pe - pi, pb - pi});
}

// First line_length pixel offsets of each discrete ray direction, anchored at
// the origin; translation makes them valid at any pixel.
std::vector<std::vector<Coord>> ray_offsets(const EnergyParams& params) {
    std::vector<std::vector<Coord>> rays(std::size_t(params.line_directions));
    const int d = params.line_length;
    for (int k = 0; k < params.line_directions; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / params.line_directions;
        const Coord far{int(std::lround(2.0 * d * std::cos(angle))),
                        int(std::lround(2.0 * d * std::sin(angle)))};
        auto& ray = rays[k];
        for_line({0, 0}, far, [&](Coord c) {
            ray.push_back(c);
            return int(ray.size()) < d;
        });
        while (int(ray.size()) < d) ray.push_back(ray.back()); // d == 1 corner case
    }
    return rays;
}

double background_cost_at(const ScoreMaps& scores, Coord p,
                          const std::vector<std::vector<Coord>>& rays) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ray : rays) {
        double sum = 0.0;
        double last = 0.0;
        for (const Coord& o : ray) {
            const int x = p.x + o.x, y = p.y + o.y;
            if (x >= 0 && x < scores.width && y >= 0 && y < scores.height) {
                const std::size_t i = (std::size_t(y) * scores.width + x) * kNumClasses;
                last = 1.0 - scores.post[i + 2];
            }
            // off-image samples repeat the last in-bounds value
            sum += last;
        }
        best = std::min(best, sum);
    }
    return best;
}

} // namespace

void EnergyParams::validate() const {
    if (line_length < 1) throw InvalidArgumentError("line length must be >= 1");
    if (alpha_w <= 0 || beta_w <= 0)
        throw InvalidArgumentError("sigmoid parameters must be positive");
    if (label_cost < 0) throw InvalidArgumentError("label cost must be >= 0");
    if (line_directions < 1) throw InvalidArgumentError("need at least one line direction");
    if (max_seed_distance <= 0) throw InvalidArgumentError("max seed distance must be positive");
}

double seed_data_cost(const ScoreMaps& scores, Coord p, const Seed& seed,
                      const EnergyParams& params) {
    const double dx = p.x - seed.center.x, dy = p.y - seed.center.y;
    if (dx * dx + dy * dy > params.max_seed_distance * params.max_seed_distance)
        return double(params.line_length) + 1.0;

    double cost = 0.0;
    for_line(p, seed.center, [&](Coord c) {
        cost += border_integrand(scores, c.x, c.y);
        return true;
    });
    return cost;
}

double background_data_cost(const ScoreMaps& scores, Coord p, const EnergyParams& params) {
    return background_cost_at(scores, p, ray_offsets(params));
}

double edge_weight(const ScoreMaps& scores, Coord p, Coord q, const EnergyParams& params) {
    if (std::abs(p.x - q.x) > 1 || std::abs(p.y - q.y) > 1 || (p.x == q.x && p.y == q.y))
        throw InvalidArgumentError("edge weight requires 8-adjacent pixels");
    auto border_margin = [&](Coord c) {
        const std::size_t i = (std::size_t(c.y) * scores.width + c.x) * kNumClasses;
        const double pi = scores.post[i], pb = scores.post[i + 1], pe = scores.post[i + 2];
        return std::min(pb - pi, pb - pe);
    };
    const double m = std::max(border_margin(p), border_margin(q));
    return 1.0 - 1.0 / (1.0 + params.alpha_w * std::exp(-params.beta_w * m));
}

EnergyModel build_energy(const ScoreMaps& scores, const SeedSet& seeds,
                         const EnergyParams& params) {
    params.validate();
    if (scores.width <= 0 || scores.height <= 0)
        throw InvalidArgumentError("empty score maps");

    EnergyModel model;
    model.width = scores.width;
    model.height = scores.height;
    model.num_labels = std::uint32_t(seeds.size()) + 1;
    model.data_cost.resize(model.num_pixels() * model.num_labels);
    model.label_cost.assign(model.num_labels, params.label_cost);
    model.label_cost[0] = 0.0; // background always available

    const auto rays = ray_offsets(params);
    for (int y = 0; y < scores.height; ++y) {
        for (int x = 0; x < scores.width; ++x) {
            const std::size_t p = std::size_t(y) * scores.width + x;
            float* row = &model.data_cost[p * model.num_labels];
            row[0] = float(background_cost_at(scores, {x, y}, rays));
            for (std::size_t k = 0; k < seeds.size(); ++k)
                row[k + 1] = float(seed_data_cost(scores, {x, y}, seeds.seeds[k], params));
        }
    }

    model.edges.reserve(model.num_pixels() * 4);
    static const int dx[] = {1, 0, 1, -1};
    static const int dy[] = {0, 1, 1, 1};
    for (int y = 0; y < scores.height; ++y) {
        for (int x = 0; x < scores.width; ++x) {
            for (int d = 0; d < 4; ++d) {
                const int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || nx >= scores.width || ny >= scores.height) continue;
                const std::uint32_t p = std::uint32_t(y * scores.width + x);
                const std::uint32_t q = std::uint32_t(ny * scores.width + nx);
                model.edges.push_back(
                    {p, q, float(edge_weight(scores, {x, y}, {nx, ny}, params))});
            }
        }
    }
    return model;
}

double evaluate_energy(const EnergyModel& model, const Labeling& labeling) {
    if (labeling.width != model.width || labeling.height != model.height)
        throw InvalidArgumentError("labeling dimensions do not match the energy model");
    for (auto id : labeling.ids)
        if (id >= model.num_labels) throw InvalidArgumentError("label id out of range");

    double e = 0.0;
    for (std::size_t p = 0; p < model.num_pixels(); ++p) e += model.data(p, labeling.ids[p]);
    for (const auto& edge : model.edges)
        if (labeling.ids[edge.p] != labeling.ids[edge.q]) e += edge.weight;

    std::vector<std::uint8_t> used(model.num_labels, 0);
    for (auto id : labeling.ids) used[id] = 1;
    for (std::uint32_t l = 0; l < model.num_labels; ++l)
        if (used[l]) e += model.label_cost[l];
    return e;
}

Labeling initial_labeling(const EnergyModel& model) {
    Labeling out(model.width, model.height);
    for (std::size_t p = 0; p < model.num_pixels(); ++p) {
        std::uint32_t best = 0;
        float best_cost = model.data(p, 0);
        for (std::uint32_t l = 1; l < model.num_labels; ++l) {
            const float c = model.data(p, l);
            if (c < best_cost) {
                best_cost = c;
                best = l;
            }
        }
        out.ids[p] = best;
    }
    return out;
}

} // namespace cellcut
