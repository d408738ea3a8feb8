#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "flow.hpp"
#include "partition.hpp"

namespace mapcent {

/// x log2 x with 0 log 0 = 0.
inline double plogp(double x) noexcept { return x > 0.0 ? x * std::log2(x) : 0.0; }

/// Shannon entropy (bits) of the visit rates: the one-level codelength.
inline double codelength_one_level(const FlowField &f) {
    double h = 0.0;
    for (double p : f.visit_rate)
        h -= plogp(p);
    return h;
}

/**
 * Map equation codelength from aggregated flows.
 *
 * Every codebook contributes usage * H(codewords): leaves encode their exit
 * and node visits, internal modules their exit and submodule entries, and
 * the root the top-level entries. Exit codewords are always counted, so the
 * result is independent of pf.convention.
 */
inline double codelength(const PartitionFlows &pf) {
    const auto &mods = pf.partition.modules();
    double total = 0.0;
    for (ModuleId x = 0; x < mods.size(); ++x) {
        const auto &mf = pf.modules[x];
        double rate = mf.exit, sum_plogp = plogp(mf.exit);
        if (mods[x].is_leaf() && x != Partition::root) {
            for (auto u : mods[x].members) {
                rate += pf.visit_rate[u];
                sum_plogp += plogp(pf.visit_rate[u]);
            }
        } else {
            for (auto c : mods[x].children) {
                rate += pf.modules[c].enter;
                sum_plogp += plogp(pf.modules[c].enter);
            }
        }
        total += plogp(rate) - sum_plogp;
    }
    return total;
}

inline double codelength(const FlowField &f, const Partition &m) {
    return codelength(aggregate_partition_flows(f, m, Convention::with_exit));
}

/// Bits saved by re-normalising a codebook of rate `usage` after removing
/// `silenced` of its rate: -(usage - silenced) log2((usage - silenced) / usage).
inline double silencing_gain(double usage, double silenced) noexcept {
    if (usage <= 0.0)
        return 0.0;
    const double rest = usage - silenced;
    if (rest <= 0.0)
        return 0.0;
    return -rest * std::log2(rest / usage);
}

/// Map equation centrality of u in its leaf module.
inline double mec_node(const PartitionFlows &pf, NodeId u) {
    if (u >= pf.visit_rate.size())
        throw ValidationError("node " + std::to_string(u) + " is not in the partition");
    return silencing_gain(pf.leaf_flow(u).usage, pf.visit_rate[u]);
}

/// Joint centrality of silencing every node in `nodes` at once; modules
/// contribute independently.
inline double mec_set(const PartitionFlows &pf, std::span<const NodeId> nodes) {
    if (nodes.empty())
        throw ValidationError("silenced set must be non-empty");
    std::vector<ModuleId> touched;
    std::vector<double> silenced(pf.modules.size(), 0.0);
    std::vector<NodeId> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (auto u : sorted) {
        if (u >= pf.visit_rate.size())
            throw ValidationError("node " + std::to_string(u) + " is not in the partition");
        const auto m = pf.partition.leaf_of(u);
        if (silenced[m] == 0.0)
            touched.push_back(m);
        silenced[m] += pf.visit_rate[u];
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    double total = 0.0;
    for (auto m : touched)
        total += silencing_gain(pf.modules[m].usage, silenced[m]);
    return total;
}

/// Scores attached to the configuration that produced them.
struct CentralityVector {
    std::string method;
    std::string flow;
    std::string convention;
    std::vector<double> scores;
};

inline CentralityVector mec_all(const PartitionFlows &pf) {
    CentralityVector out;
    out.method = "mec";
    out.convention = std::string(to_string(pf.convention));
    const auto n = pf.visit_rate.size();
    out.scores.resize(n);
    for (NodeId u = 0; u < n; ++u)
        out.scores[u] = silencing_gain(pf.modules[pf.partition.leaf_of(u)].usage, pf.visit_rate[u]);
    return out;
}

/// Node ids by descending score, ties broken by ascending id.
inline std::vector<NodeId> ranking(std::span<const double> scores) {
    std::vector<NodeId> order(scores.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
    return order;
}

} // namespace mapcent
