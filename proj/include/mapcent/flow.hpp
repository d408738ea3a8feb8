#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "partition.hpp"

namespace mapcent {

enum class FlowModel { raw_undirected, link_teleport, node_teleport };

inline std::string_view to_string(FlowModel m) {
    switch (m) {
    case FlowModel::raw_undirected: return "raw";
    case FlowModel::link_teleport: return "link-teleport";
    case FlowModel::node_teleport: return "node-teleport";
    }
    return "?";
}

inline FlowModel parse_flow_model(std::string_view s) {
    if (s == "raw") return FlowModel::raw_undirected;
    if (s == "link-teleport") return FlowModel::link_teleport;
    if (s == "node-teleport") return FlowModel::node_teleport;
    throw ValidationError("unknown flow model '" + std::string(s) + "'");
}

/**
 * Node visit rates plus recorded random-walk steps.
 *
 * Recorded steps are split into sparse link flows and node teleportation:
 * node u emits teleport_out[u] recorded mass that lands on v with probability
 * teleport_target[v]. Total recorded mass is one, and every visit rate equals
 * the recorded in-flow of its node.
 */
struct FlowField {
    FlowModel model = FlowModel::raw_undirected;
    double teleport_rate = 0.0;
    std::vector<double> visit_rate;
    std::vector<Link> link_flow; ///< directed u->v steps; undirected graphs list both directions
    std::vector<double> teleport_out;    ///< empty when no teleportation is recorded
    std::vector<double> teleport_target; ///< empty when no teleportation is recorded

    std::size_t num_nodes() const noexcept { return visit_rate.size(); }
    bool records_teleportation() const noexcept { return !teleport_out.empty(); }

    double total_teleport() const {
        return std::accumulate(teleport_out.begin(), teleport_out.end(), 0.0);
    }
};

struct PowerIteration {
    double tol = 1e-12;
    std::size_t max_iter = 10'000;
};

/// p_u = s_u / sum_v s_v; each link carries w / (2W) in each direction.
inline FlowField visit_rates_undirected(const Graph &g) {
    if (g.directed())
        throw ValidationError("analytic visit rates need an undirected graph");
    if (g.num_nodes() == 0 || g.num_links() == 0)
        throw ValidationError("flow needs a graph with at least one link");
    FlowField f;
    f.model = FlowModel::raw_undirected;
    const double total = 2.0 * g.total_weight();
    f.visit_rate.resize(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        f.visit_rate[u] = g.strength(u) / total;
    f.link_flow.reserve(2 * g.num_links());
    for (const auto &l : g.links()) {
        f.link_flow.push_back({l.source, l.target, l.weight / total});
        f.link_flow.push_back({l.target, l.source, l.weight / total});
    }
    return f;
}

namespace detail {

/// One step of the (optionally lazy) teleporting walk:
/// next = (1-tau) * W^T D^-1 x + (tau * x_nondangling + x_dangling) * target.
inline void teleport_step(const Graph &g, double tau, const std::vector<double> &target,
                          const std::vector<double> &x, std::vector<double> &next, bool lazy) {
    const auto n = g.num_nodes();
    std::fill(next.begin(), next.end(), 0.0);
    double jump = 0.0;
    for (NodeId u = 0; u < n; ++u) {
        const double s = g.out_strength(u);
        if (s <= 0.0) {
            jump += x[u];
            continue;
        }
        jump += tau * x[u];
        const double scale = (1.0 - tau) * x[u] / s;
        for (const auto &nb : g.out_neighbors(u))
            next[nb.node] += scale * nb.weight;
    }
    for (NodeId v = 0; v < n; ++v)
        next[v] += jump * target[v];
    if (lazy)
        for (NodeId v = 0; v < n; ++v)
            next[v] = 0.5 * (next[v] + x[v]);
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    for (auto &v : next)
        v /= sum;
}

inline std::vector<double> stationary(const Graph &g, double tau, const std::vector<double> &target,
                                      PowerIteration it) {
    const auto n = g.num_nodes();
    std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n);
    // Without teleportation the chain may be periodic; the lazy chain has
    // the same stationary distribution and is aperiodic.
    const bool lazy = tau == 0.0;
    double residual = 0.0;
    for (std::size_t i = 0; i < it.max_iter; ++i) {
        teleport_step(g, tau, target, x, next, lazy);
        residual = 0.0;
        for (NodeId v = 0; v < n; ++v)
            residual += std::abs(next[v] - x[v]);
        x.swap(next);
        if (residual < it.tol)
            return x;
    }
    throw ConvergenceError("power iteration did not converge", residual);
}

} // namespace detail

/// Standard PageRank flow: teleportation to a uniformly chosen node, and the
/// teleport steps are part of the encoded flow.
inline FlowField visit_rates_node_teleport(const Graph &g, double tau = 0.15, PowerIteration it = {}) {
    if (!(tau >= 0.0 && tau < 1.0))
        throw ValidationError("teleportation rate must lie in [0, 1)");
    const auto n = g.num_nodes();
    if (n == 0)
        throw ValidationError("flow needs a non-empty graph");
    const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    FlowField f;
    f.model = FlowModel::node_teleport;
    f.teleport_rate = tau;
    f.visit_rate = detail::stationary(g, tau, uniform, it);

    f.teleport_out.assign(n, 0.0);
    f.teleport_target = uniform;
    for (NodeId u = 0; u < n; ++u) {
        const double s = g.out_strength(u);
        const double p = f.visit_rate[u];
        if (s <= 0.0) {
            f.teleport_out[u] = p;
            continue;
        }
        f.teleport_out[u] = tau * p;
        for (const auto &nb : g.out_neighbors(u))
            f.link_flow.push_back({u, nb.node, (1.0 - tau) * p * nb.weight / s});
    }
    if (tau == 0.0 && f.total_teleport() == 0.0) {
        f.teleport_out.clear();
        f.teleport_target.clear();
    }
    return f;
}

/// Unrecorded link teleportation: the walker teleports to the head of a
/// weight-proportionally chosen link; only link-following steps are encoded.
inline FlowField visit_rates_link_teleport(const Graph &g, double tau = 0.15, PowerIteration it = {}) {
    if (!(tau > 0.0 && tau < 1.0))
        throw ValidationError("link teleportation rate must lie in (0, 1)");
    const auto n = g.num_nodes();
    if (n == 0 || g.num_links() == 0)
        throw ValidationError("flow needs a graph with at least one link");

    std::vector<double> target(n);
    double total_in = 0.0;
    for (NodeId v = 0; v < n; ++v)
        total_in += g.in_strength(v);
    for (NodeId v = 0; v < n; ++v)
        target[v] = g.in_strength(v) / total_in;
    const auto alpha = detail::stationary(g, tau, target, it);

    FlowField f;
    f.model = FlowModel::link_teleport;
    f.teleport_rate = tau;
    double total = 0.0;
    for (NodeId u = 0; u < n; ++u) {
        const double s = g.out_strength(u);
        if (s <= 0.0)
            continue;
        for (const auto &nb : g.out_neighbors(u)) {
            const double flow = alpha[u] * (1.0 - tau) * nb.weight / s;
            f.link_flow.push_back({u, nb.node, flow});
            total += flow;
        }
    }
    f.visit_rate.assign(n, 0.0);
    for (auto &l : f.link_flow) {
        l.weight /= total;
        f.visit_rate[l.target] += l.weight;
    }
    return f;
}

/// Dispatches on the model; raw flow on a directed graph falls back to
/// node teleportation with the given rate.
inline FlowField compute_flow(const Graph &g, FlowModel model, double tau = 0.15, PowerIteration it = {}) {
    switch (model) {
    case FlowModel::raw_undirected:
        if (!g.directed())
            return visit_rates_undirected(g);
        return visit_rates_node_teleport(g, tau, it);
    case FlowModel::link_teleport: return visit_rates_link_teleport(g, tau, it);
    case FlowModel::node_teleport: return visit_rates_node_teleport(g, tau, it);
    }
    throw ValidationError("unknown flow model");
}

// ---------------------------------------------------------------------------
// Partition flows

/// with_exit: a leaf codebook is used at node-rate sum plus exit rate.
/// node_flow: a leaf codebook is used at the node-rate sum only.
enum class Convention { with_exit, node_flow };

inline std::string_view to_string(Convention c) {
    return c == Convention::with_exit ? "with-exit" : "node-flow";
}

inline Convention parse_convention(std::string_view s) {
    if (s == "with-exit") return Convention::with_exit;
    if (s == "node-flow") return Convention::node_flow;
    throw ValidationError("unknown convention '" + std::string(s) + "'");
}

struct ModuleFlow {
    double enter = 0.0;
    double exit = 0.0;
    double node_rate_sum = 0.0; ///< sum of member visit rates, over all descendants
    double usage = 0.0;         ///< codebook usage rate p_m per convention
};

/**
 * Module entry/exit and codebook rates for every module of a partition,
 * indexed like Partition::modules() (index 0 is the root).
 *
 * Internal modules use exit + sum of submodule entries as their codebook
 * rate under either convention; the convention only changes leaf modules.
 */
struct PartitionFlows {
    Convention convention = Convention::with_exit;
    Partition partition;
    std::vector<double> visit_rate;
    std::vector<ModuleFlow> modules;

    /// Index codebook usage q: sum of top-level module entry rates.
    double index_usage() const { return modules.empty() ? 0.0 : modules[Partition::root].usage; }

    const ModuleFlow &leaf_flow(NodeId u) const { return modules[partition.leaf_of(u)]; }
};

inline PartitionFlows aggregate_partition_flows(const FlowField &f, const Partition &m,
                                                Convention convention = Convention::with_exit) {
    if (m.num_nodes() != f.num_nodes())
        throw ValidationError("partition covers " + std::to_string(m.num_nodes()) +
                              " nodes but the flow field has " + std::to_string(f.num_nodes()));
    PartitionFlows pf;
    pf.convention = convention;
    pf.partition = m;
    pf.visit_rate = f.visit_rate;
    const auto &mods = m.modules();
    pf.modules.assign(mods.size(), {});

    std::vector<std::uint32_t> depth(mods.size(), 0);
    for (ModuleId i = 1; i < mods.size(); ++i)
        depth[i] = depth[mods[i].parent] + 1; // parents precede children

    std::vector<double> tele(mods.size(), 0.0), target(mods.size(), 0.0);
    for (NodeId u = 0; u < f.num_nodes(); ++u) {
        for (ModuleId x = m.leaf_of(u);; x = mods[x].parent) {
            pf.modules[x].node_rate_sum += f.visit_rate[u];
            if (f.records_teleportation()) {
                tele[x] += f.teleport_out[u];
                target[x] += f.teleport_target[u];
            }
            if (x == Partition::root)
                break;
        }
    }

    for (const auto &l : f.link_flow) {
        ModuleId a = m.leaf_of(l.source), b = m.leaf_of(l.target);
        while (a != b) {
            if (depth[a] >= depth[b]) {
                pf.modules[a].exit += l.weight;
                a = mods[a].parent;
            } else {
                pf.modules[b].enter += l.weight;
                b = mods[b].parent;
            }
        }
    }

    if (f.records_teleportation()) {
        const double total = tele[Partition::root];
        for (ModuleId x = 1; x < mods.size(); ++x) {
            pf.modules[x].exit += tele[x] * (1.0 - target[x]);
            pf.modules[x].enter += (total - tele[x]) * target[x];
        }
    }

    for (ModuleId x = 0; x < mods.size(); ++x) {
        auto &mf = pf.modules[x];
        if (mods[x].is_leaf() && x != Partition::root) {
            mf.usage = convention == Convention::with_exit ? mf.node_rate_sum + mf.exit : mf.node_rate_sum;
        } else {
            mf.usage = mf.exit;
            for (auto c : mods[x].children)
                mf.usage += pf.modules[c].enter;
        }
    }
    return pf;
}

} // namespace mapcent
