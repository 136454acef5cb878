#ifndef CELLCUT_OPTIMIZER_HPP
#define CELLCUT_OPTIMIZER_HPP

#include <cstdint>
#include <vector>

#include "cellcut/energy.hpp"

namespace cellcut {

// s-t network with per-node terminal capacities and directed neighbor arcs.
// Arcs are stored as twin pairs so residuals of an arc and its reverse share
// storage.
class FlowNetwork {
public:
    explicit FlowNetwork(std::size_t num_nodes = 0);

    std::size_t num_nodes() const { return excess_.size(); }
    std::size_t add_node();

    // Capacity from the source (cap_source) and to the sink (cap_sink).
    // Accumulates across calls.
    void add_terminal(std::size_t node, double cap_source, double cap_sink);

    // Directed arc from -> to with the given capacity; the implicit reverse
    // arc gets rev_capacity (0 by default).
    void add_edge(std::size_t from, std::size_t to, double capacity, double rev_capacity = 0.0);

    struct MaxFlowResult {
        double flow = 0.0;
        // true = source side, by reachability in the final residual graph
        std::vector<bool> source_side;
    };

    // Exact max flow (Boykov-Kolmogorov search-tree algorithm). Consumes the
    // residual state; call once per built network.
    MaxFlowResult max_flow();

private:
    struct Arc {
        std::uint32_t head;
        std::uint32_t next; // next arc out of the tail node
        double residual;
    };

    static constexpr std::uint32_t kNone = 0xffffffffu;

    std::vector<double> excess_;   // >0: residual source cap, <0: residual sink cap
    std::vector<std::uint32_t> first_arc_;
    std::vector<Arc> arcs_;        // twin arcs at indices 2k, 2k+1
    double flow_ = 0.0;
};

// Best single alpha-expansion of `current`: every pixel keeps its label or
// switches to alpha; label costs are handled with one auxiliary node per
// affected label, so a label's cost is paid iff some pixel carries it after
// the move. Exact per move (min-cut on the submodular binary reduction).
Labeling expansion_move(const EnergyModel& model, const Labeling& current, std::uint32_t alpha);

struct SweepStat {
    int sweep = 0;
    double energy = 0.0;
    std::uint32_t labels_in_use = 0;
};

struct MinimizeResult {
    Labeling labeling;
    std::vector<double> energy_trace; // initial energy, then one entry per move
    std::vector<SweepStat> sweeps;
    bool converged = false;
};

// Cycles expansions over all labels (background first, then seeds by id)
// until a full sweep changes nothing or max_sweeps is reached. Every recorded
// energy comes from evaluate_energy.
MinimizeResult minimize(const EnergyModel& model, const Labeling& init, int max_sweeps);

} // namespace cellcut

#endif
