#include "cellcut/optimizer.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "cellcut/error.hpp"

namespace cellcut {

FlowNetwork::FlowNetwork(std::size_t num_nodes)
    : excess_(num_nodes, 0.0), first_arc_(num_nodes, kNone) {}

std::size_t FlowNetwork::add_node() {
    excess_.push_back(0.0);
    first_arc_.push_back(kNone);
    return excess_.size() - 1;
}

void FlowNetwork::add_terminal(std::size_t node, double cap_source, double cap_sink) {
    if (node >= excess_.size())
        throw InvalidArgumentError("add_terminal: node index out of range");
    // Merge with the stored net capacity: a unit of source cap and a unit of
    // sink cap at the same node cancel into direct source->sink flow. Negative
    // inputs are allowed and fold into the net value (the flow total then
    // differs from the true cut by a constant, which callers that use such
    // costs must not rely on).
    double delta = excess_[node];
    if (delta > 0.0)
        cap_source += delta;
    else
        cap_sink -= delta;
    flow_ += std::min(cap_source, cap_sink);
    excess_[node] = cap_source - cap_sink;
}

void FlowNetwork::add_edge(std::size_t from, std::size_t to, double capacity, double rev_capacity) {
    if (from >= excess_.size() || to >= excess_.size())
        throw InvalidArgumentError("add_edge: node index out of range");
    if (capacity < 0.0 || rev_capacity < 0.0)
        throw InvalidArgumentError("add_edge: negative capacity");
    const std::uint32_t idx = static_cast<std::uint32_t>(arcs_.size());
    arcs_.push_back({static_cast<std::uint32_t>(to), first_arc_[from], capacity});
    first_arc_[from] = idx;
    arcs_.push_back({static_cast<std::uint32_t>(from), first_arc_[to], rev_capacity});
    first_arc_[to] = idx + 1;
}

namespace {

constexpr std::uint8_t kFree = 0;
constexpr std::uint8_t kSource = 1;
constexpr std::uint8_t kSink = 2;

constexpr std::uint32_t kParentNone = 0xffffffffu;
constexpr std::uint32_t kParentTerminal = 0xfffffffeu;
constexpr std::uint32_t kParentOrphan = 0xfffffffdu;

constexpr std::uint32_t kInfDist = 0xffffffffu;

} // namespace

FlowNetwork::MaxFlowResult FlowNetwork::max_flow() {
    // Boykov-Kolmogorov: grow a source tree and a sink tree, augment when they
    // touch, re-adopt orphans after each augmentation. Timestamp/distance
    // caching makes the root checks during adoption cheap.
    const std::size_t n = excess_.size();
    std::vector<std::uint8_t> tree(n, kFree);
    std::vector<std::uint32_t> parent(n, kParentNone);
    std::vector<std::uint32_t> ts(n, 0);
    std::vector<std::uint32_t> dist(n, 0);
    std::vector<std::uint8_t> queued(n, 0);
    std::deque<std::uint32_t> active;
    std::deque<std::uint32_t> orphans;
    std::uint32_t time = 0;

    auto activate = [&](std::uint32_t v) {
        if (!queued[v]) {
            queued[v] = 1;
            active.push_back(v);
        }
    };
    auto make_orphan = [&](std::uint32_t v) {
        parent[v] = kParentOrphan;
        orphans.push_back(v);
    };

    for (std::uint32_t v = 0; v < n; ++v) {
        if (excess_[v] == 0.0)
            continue;
        tree[v] = excess_[v] > 0.0 ? kSource : kSink;
        parent[v] = kParentTerminal;
        dist[v] = 1;
        activate(v);
    }

    while (true) {
        // --- growth ---
        std::uint32_t connect = kNone;
        while (!active.empty() && connect == kNone) {
            const std::uint32_t v = active.front();
            active.pop_front();
            queued[v] = 0;
            if (tree[v] == kFree)
                continue;
            const std::uint8_t side = tree[v];
            for (std::uint32_t a = first_arc_[v]; a != kNone; a = arcs_[a].next) {
                const double r = side == kSource ? arcs_[a].residual : arcs_[a ^ 1].residual;
                if (r <= 0.0)
                    continue;
                const std::uint32_t q = arcs_[a].head;
                if (tree[q] == kFree) {
                    tree[q] = side;
                    parent[q] = a ^ 1;
                    ts[q] = ts[v];
                    dist[q] = dist[v] + 1;
                    activate(q);
                } else if (tree[q] != side) {
                    // Trees meet: the augmenting arc always runs source-tree
                    // to sink-tree.
                    connect = side == kSource ? a : (a ^ 1);
                    activate(v); // remaining arcs get rescanned later
                    break;
                } else if (ts[q] <= ts[v] && dist[q] > dist[v] + 1) {
                    parent[q] = a ^ 1; // shorter route to the root
                    ts[q] = ts[v];
                    dist[q] = dist[v] + 1;
                }
            }
        }
        if (connect == kNone)
            break;
        ++time;

        // --- augmentation along the path through `connect` ---
        double bottleneck = arcs_[connect].residual;
        std::uint32_t v = arcs_[connect ^ 1].head; // tail (source tree)
        while (parent[v] != kParentTerminal) {
            const std::uint32_t pa = parent[v];
            bottleneck = std::min(bottleneck, arcs_[pa ^ 1].residual);
            v = arcs_[pa].head;
        }
        bottleneck = std::min(bottleneck, excess_[v]);
        v = arcs_[connect].head; // head (sink tree)
        while (parent[v] != kParentTerminal) {
            const std::uint32_t pa = parent[v];
            bottleneck = std::min(bottleneck, arcs_[pa].residual);
            v = arcs_[pa].head;
        }
        bottleneck = std::min(bottleneck, -excess_[v]);

        flow_ += bottleneck;
        arcs_[connect].residual -= bottleneck;
        arcs_[connect ^ 1].residual += bottleneck;

        v = arcs_[connect ^ 1].head;
        while (parent[v] != kParentTerminal) {
            const std::uint32_t pa = parent[v];
            arcs_[pa ^ 1].residual -= bottleneck;
            arcs_[pa].residual += bottleneck;
            const std::uint32_t next = arcs_[pa].head;
            if (arcs_[pa ^ 1].residual == 0.0)
                make_orphan(v);
            v = next;
        }
        excess_[v] -= bottleneck;
        if (excess_[v] == 0.0)
            make_orphan(v);

        v = arcs_[connect].head;
        while (parent[v] != kParentTerminal) {
            const std::uint32_t pa = parent[v];
            arcs_[pa].residual -= bottleneck;
            arcs_[pa ^ 1].residual += bottleneck;
            const std::uint32_t next = arcs_[pa].head;
            if (arcs_[pa].residual == 0.0)
                make_orphan(v);
            v = next;
        }
        excess_[v] += bottleneck;
        if (excess_[v] == 0.0)
            make_orphan(v);

        // --- adoption ---
        while (!orphans.empty()) {
            const std::uint32_t o = orphans.front();
            orphans.pop_front();
            const std::uint8_t side = tree[o];

            std::uint32_t best_arc = kNone;
            std::uint32_t best_dist = kInfDist;
            for (std::uint32_t a = first_arc_[o]; a != kNone; a = arcs_[a].next) {
                const double r = side == kSource ? arcs_[a ^ 1].residual : arcs_[a].residual;
                if (r <= 0.0)
                    continue;
                const std::uint32_t q = arcs_[a].head;
                if (tree[q] != side || parent[q] == kParentNone)
                    continue;
                // Walk toward the root to confirm q still hangs off a
                // terminal; cache distances along the way.
                std::uint32_t d = 0;
                std::uint32_t u = q;
                bool rooted = false;
                while (true) {
                    if (ts[u] == time) {
                        d += dist[u];
                        rooted = true;
                        break;
                    }
                    const std::uint32_t pu = parent[u];
                    ++d;
                    if (pu == kParentTerminal) {
                        ts[u] = time;
                        dist[u] = 1;
                        rooted = true;
                        break;
                    }
                    if (pu == kParentOrphan || pu == kParentNone) {
                        rooted = false;
                        break;
                    }
                    u = arcs_[pu].head;
                }
                if (!rooted)
                    continue;
                if (d < best_dist) {
                    best_dist = d;
                    best_arc = a;
                }
                std::uint32_t dd = d;
                for (u = q; ts[u] != time; u = arcs_[parent[u]].head) {
                    ts[u] = time;
                    dist[u] = dd--;
                }
            }

            if (best_arc != kNone) {
                parent[o] = best_arc;
                ts[o] = time;
                dist[o] = best_dist + 1;
            } else {
                // No valid parent: o leaves the tree, its children become
                // orphans, and neighbors that could recapture it wake up.
                tree[o] = kFree;
                parent[o] = kParentNone;
                for (std::uint32_t a = first_arc_[o]; a != kNone; a = arcs_[a].next) {
                    const std::uint32_t q = arcs_[a].head;
                    if (tree[q] != side)
                        continue;
                    const double r = side == kSource ? arcs_[a ^ 1].residual : arcs_[a].residual;
                    if (r > 0.0)
                        activate(q);
                    if (parent[q] == (a ^ 1))
                        make_orphan(q);
                }
            }
        }
    }

    // Partition by reachability from the source in the residual graph.
    MaxFlowResult result;
    result.flow = flow_;
    result.source_side.assign(n, false);
    std::deque<std::uint32_t> bfs;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (excess_[v] > 0.0) {
            result.source_side[v] = true;
            bfs.push_back(v);
        }
    }
    while (!bfs.empty()) {
        const std::uint32_t v = bfs.front();
        bfs.pop_front();
        for (std::uint32_t a = first_arc_[v]; a != kNone; a = arcs_[a].next) {
            if (arcs_[a].residual <= 0.0)
                continue;
            const std::uint32_t q = arcs_[a].head;
            if (!result.source_side[q]) {
                result.source_side[q] = true;
                bfs.push_back(q);
            }
        }
    }
    return result;
}

namespace {

std::uint32_t count_labels_in_use(const Labeling& l, std::uint32_t num_labels) {
    std::vector<std::uint8_t> seen(num_labels, 0);
    std::uint32_t count = 0;
    for (std::uint32_t id : l.ids) {
        if (!seen[id]) {
            seen[id] = 1;
            ++count;
        }
    }
    return count;
}

} // namespace

Labeling expansion_move(const EnergyModel& model, const Labeling& current, std::uint32_t alpha) {
    if (current.width != model.width || current.height != model.height)
        throw InvalidArgumentError("expansion_move: labeling size does not match model");
    if (alpha >= model.num_labels)
        throw InvalidArgumentError("expansion_move: alpha out of range");
    const std::size_t n = model.num_pixels();
    for (std::uint32_t id : current.ids)
        if (id >= model.num_labels)
            throw InvalidArgumentError("expansion_move: label id out of range");

    // Binary variables x_p for every pixel not already at alpha: x_p = 1
    // (source side) switches p to alpha, x_p = 0 keeps its label. The graph
    // encodes the move energy up to an additive constant; constants are
    // dropped since only the argmin matters.
    constexpr std::uint32_t kFixed = 0xffffffffu;
    std::vector<std::uint32_t> var_of(n, kFixed);
    std::size_t num_vars = 0;
    for (std::size_t p = 0; p < n; ++p)
        if (current.ids[p] != alpha)
            var_of[p] = static_cast<std::uint32_t>(num_vars++);
    if (num_vars == 0)
        return current;

    FlowNetwork net(num_vars);
    for (std::size_t p = 0; p < n; ++p) {
        if (var_of[p] == kFixed)
            continue;
        net.add_terminal(var_of[p], model.data(p, current.ids[p]), model.data(p, alpha));
    }

    for (const GridEdge& e : model.edges) {
        const std::uint32_t vp = var_of[e.p];
        const std::uint32_t vq = var_of[e.q];
        const double w = e.weight;
        if (vp == kFixed && vq == kFixed)
            continue;
        if (vp == kFixed) {
            net.add_terminal(vq, w, 0.0); // keeping q's label disagrees with alpha at p
            continue;
        }
        if (vq == kFixed) {
            net.add_terminal(vp, w, 0.0);
            continue;
        }
        // E(0,0)=w iff the labels already disagree; E(0,1)=E(1,0)=w; E(1,1)=0.
        const double a00 = current.ids[e.p] != current.ids[e.q] ? w : 0.0;
        net.add_terminal(vp, 0.0, w - a00);
        net.add_terminal(vq, 0.0, -w);
        net.add_edge(vq, vp, 2.0 * w - a00);
    }

    // A label other than alpha keeps costing h_L exactly when at least one
    // pixel holds on to it; one auxiliary node per such label arranges that.
    // Alpha's own cost is constant over every non-null move, so it only enters
    // through the final comparison against the unchanged labeling.
    std::vector<std::vector<std::uint32_t>> holders(model.num_labels);
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint32_t id = current.ids[p];
        if (id != alpha && model.label_cost[id] > 0.0)
            holders[id].push_back(var_of[p]);
    }
    for (std::uint32_t id = 0; id < model.num_labels; ++id) {
        if (holders[id].empty())
            continue;
        const double h = model.label_cost[id];
        const std::uint32_t aux = static_cast<std::uint32_t>(net.add_node());
        net.add_terminal(aux, h, 0.0);
        for (std::uint32_t v : holders[id]) {
            net.add_terminal(aux, 0.0, h);
            net.add_terminal(v, 0.0, -h);
            net.add_edge(v, aux, h);
        }
    }

    const FlowNetwork::MaxFlowResult cut = net.max_flow();

    Labeling moved = current;
    for (std::size_t p = 0; p < n; ++p)
        if (var_of[p] != kFixed && cut.source_side[var_of[p]])
            moved.ids[p] = alpha;

    // Guards both the alpha-label-cost constant and any floating-point
    // slack: the move is taken only if it strictly lowers the energy.
    if (evaluate_energy(model, moved) < evaluate_energy(model, current))
        return moved;
    return current;
}

MinimizeResult minimize(const EnergyModel& model, const Labeling& init, int max_sweeps) {
    if (init.width != model.width || init.height != model.height)
        throw InvalidArgumentError("minimize: labeling size does not match model");
    if (max_sweeps < 1)
        throw InvalidArgumentError("minimize: max_sweeps must be >= 1");

    MinimizeResult res;
    res.labeling = init;
    res.energy_trace.push_back(evaluate_energy(model, res.labeling));

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        bool changed = false;
        for (std::uint32_t alpha = 0; alpha < model.num_labels; ++alpha) {
            Labeling next = expansion_move(model, res.labeling, alpha);
            if (next.ids != res.labeling.ids) {
                res.labeling = std::move(next);
                changed = true;
            }
            res.energy_trace.push_back(evaluate_energy(model, res.labeling));
        }
        res.sweeps.push_back({sweep, res.energy_trace.back(),
                              count_labels_in_use(res.labeling, model.num_labels)});
        if (!changed) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace cellcut
