#pragma once

#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "flow.hpp"
#include "graph.hpp"
#include "mapeq.hpp"
#include "parallel.hpp"
#include "partition.hpp"
#include "partitioning.hpp"

namespace mapcent {

/// Total degree over n - 1.
inline CentralityVector degree_centrality(const Graph &g) {
    const auto n = g.num_nodes();
    if (n < 2)
        throw ValidationError("degree centrality needs at least two nodes");
    CentralityVector out{"dc", "", "", std::vector<double>(n)};
    for (NodeId u = 0; u < n; ++u)
        out.scores[u] = static_cast<double>(g.degree(u)) / static_cast<double>(n - 1);
    return out;
}

/**
 * Brandes betweenness on unweighted shortest paths, normalised by
 * (n-1)(n-2)/2 for undirected and (n-1)(n-2) for directed graphs.
 * Sources are processed in parallel; per-source contributions are summed in
 * source order so the result does not depend on the worker count.
 */
inline CentralityVector betweenness_centrality(const Graph &g, unsigned threads = 0) {
    const auto n = g.num_nodes();
    CentralityVector out{"bc", "", "", std::vector<double>(n, 0.0)};
    if (n < 3)
        return out;

    constexpr std::size_t block = 64;
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<std::vector<double>> partial(blocks);
    parallel_for(
        blocks,
        [&](std::size_t b) {
            std::vector<double> acc(n, 0.0), sigma(n), delta(n);
            std::vector<std::int64_t> dist(n);
            std::vector<NodeId> stack;
            std::vector<std::vector<NodeId>> preds(n);
            const auto end = std::min<std::size_t>(n, (b + 1) * block);
            for (auto s = static_cast<NodeId>(b * block); s < end; ++s) {
                std::fill(sigma.begin(), sigma.end(), 0.0);
                std::fill(delta.begin(), delta.end(), 0.0);
                std::fill(dist.begin(), dist.end(), -1);
                for (auto &p : preds)
                    p.clear();
                stack.clear();
                sigma[s] = 1.0;
                dist[s] = 0;
                std::queue<NodeId> q;
                q.push(s);
                while (!q.empty()) {
                    const auto v = q.front();
                    q.pop();
                    stack.push_back(v);
                    for (const auto &nb : g.out_neighbors(v)) {
                        const auto w = nb.node;
                        if (dist[w] < 0) {
                            dist[w] = dist[v] + 1;
                            q.push(w);
                        }
                        if (dist[w] == dist[v] + 1) {
                            sigma[w] += sigma[v];
                            preds[w].push_back(v);
                        }
                    }
                }
                for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                    const auto w = *it;
                    for (auto v : preds[w])
                        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                    if (w != s)
                        acc[w] += delta[w];
                }
            }
            partial[b] = std::move(acc);
        },
        threads);

    for (const auto &p : partial)
        for (NodeId u = 0; u < n; ++u)
            out.scores[u] += p[u];
    // Undirected sums count every pair twice, which the halved normaliser absorbs.
    const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (auto &s : out.scores)
        s /= pairs;
    return out;
}

/// Visit rates under node teleportation; tau = 0 gives plain random-walk rates.
inline CentralityVector pagerank(const Graph &g, double tau = 0.15, PowerIteration it = {}) {
    auto f = visit_rates_node_teleport(g, tau, it);
    return {"pr", "node-teleport", "", std::move(f.visit_rate)};
}

/// |Q(G, M) - Q(G - u, M - u)| per node.
inline CentralityVector modularity_vitality(const Graph &g, const Partition &m) {
    if (m.num_nodes() != g.num_nodes())
        throw ValidationError("partition does not match graph");
    const auto n = g.num_nodes();
    const double total = g.total_weight();
    if (!(total > 0.0))
        throw ValidationError("modularity vitality needs at least one link");

    // Q = sum_m internal_m / L - d_out_m * d_in_m / L^2 (undirected: d_out = d_in
    // = strength sum and L^2 -> 4L^2). Removing u changes only u's module
    // terms, the neighbour modules' degree sums and L.
    const auto k = m.modules().size();
    std::vector<double> internal(k, 0.0), d_out(k, 0.0), d_in(k, 0.0);
    for (const auto &l : g.links())
        if (m.leaf_of(l.source) == m.leaf_of(l.target))
            internal[m.leaf_of(l.source)] += l.weight;
    for (NodeId u = 0; u < n; ++u) {
        d_out[m.leaf_of(u)] += g.out_strength(u);
        d_in[m.leaf_of(u)] += g.in_strength(u);
    }
    const bool directed = g.directed();
    double sum_internal = 0.0, sum_degree_product = 0.0;
    for (auto leaf : m.leaves()) {
        sum_internal += internal[leaf];
        sum_degree_product += d_out[leaf] * d_in[leaf];
    }
    const double scale = directed ? total * total : 4.0 * total * total;
    const double q = sum_internal / total - sum_degree_product / scale;

    CentralityVector out{"mv", "", "", std::vector<double>(n, 0.0)};
    std::vector<double> lose_out(k, 0.0), lose_in(k, 0.0);
    std::vector<ModuleId> touched;
    for (NodeId u = 0; u < n; ++u) {
        const auto mu = m.leaf_of(u);
        double removed = 0.0, removed_internal = 0.0;
        touched.clear();
        auto note = [&](ModuleId x) { touched.push_back(x); };
        // u's own strengths leave its module.
        note(mu);
        lose_out[mu] += g.out_strength(u);
        lose_in[mu] += g.in_strength(u);
        for (const auto &nb : g.out_neighbors(u)) {
            removed += nb.weight;
            const auto x = m.leaf_of(nb.node);
            if (x == mu)
                removed_internal += nb.weight;
            note(x);
            // v loses in-strength (directed) or strength (undirected).
            lose_in[x] += nb.weight;
            if (!directed)
                lose_out[x] += nb.weight;
        }
        if (directed)
            for (const auto &nb : g.in_neighbors(u)) {
                removed += nb.weight;
                const auto x = m.leaf_of(nb.node);
                if (x == mu)
                    removed_internal += nb.weight;
                note(x);
                lose_out[x] += nb.weight;
            }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        const double links = total - removed;
        double q_after = 0.0;
        if (links > 0.0) {
            double prod = sum_degree_product;
            for (auto x : touched)
                prod += (d_out[x] - lose_out[x]) * (d_in[x] - lose_in[x]) - d_out[x] * d_in[x];
            const double s = directed ? links * links : 4.0 * links * links;
            q_after = (sum_internal - removed_internal) / links - prod / s;
        }
        out.scores[u] = std::abs(q - q_after);
        for (auto x : touched)
            lose_out[x] = lose_in[x] = 0.0;
    }
    return out;
}

/// Per-node neighbour counts towards every leaf module; out-neighbours in
/// directed graphs.
struct ModuleLinkProfile {
    std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> per_node; ///< (leaf rank, k_u^m)
    std::vector<std::size_t> own;         ///< k_u^{m_u}
    std::vector<std::size_t> outside;     ///< neighbours outside m_u
    std::vector<std::size_t> neighbouring; ///< NNC_u

    static ModuleLinkProfile build(const Graph &g, const Partition &m) {
        const auto n = g.num_nodes();
        const auto rank = m.leaf_labels();
        ModuleLinkProfile p;
        p.per_node.resize(n);
        p.own.assign(n, 0);
        p.outside.assign(n, 0);
        p.neighbouring.assign(n, 0);
        std::vector<std::size_t> count(m.num_leaf_modules(), 0);
        std::vector<std::uint32_t> seen;
        for (NodeId u = 0; u < n; ++u) {
            seen.clear();
            for (const auto &nb : g.out_neighbors(u)) {
                const auto x = rank[nb.node];
                if (count[x]++ == 0)
                    seen.push_back(x);
            }
            std::sort(seen.begin(), seen.end());
            for (auto x : seen) {
                p.per_node[u].emplace_back(x, count[x]);
                if (x == rank[u])
                    p.own[u] = count[x];
                else {
                    p.outside[u] += count[x];
                    ++p.neighbouring[u];
                }
                count[x] = 0;
            }
        }
        return p;
    }
};

/// |m_u| * k_u^{m_u} + NNC_u * k_u^{outside}. With `literal_sum`, the intra
/// term sums |m| * k_u^m over every module.
inline CentralityVector community_hub_bridge(const Graph &g, const Partition &m, bool literal_sum = false) {
    if (m.num_nodes() != g.num_nodes())
        throw ValidationError("partition does not match graph");
    const auto prof = ModuleLinkProfile::build(g, m);
    const auto rank = m.leaf_labels();
    std::vector<double> size(m.num_leaf_modules());
    for (std::size_t i = 0; i < size.size(); ++i)
        size[i] = static_cast<double>(m.module(m.leaves()[i]).members.size());
    CentralityVector out{"chb", "", "", std::vector<double>(g.num_nodes(), 0.0)};
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        double hub = 0.0;
        if (literal_sum)
            for (auto [x, k] : prof.per_node[u])
                hub += size[x] * static_cast<double>(k);
        else
            hub = size[rank[u]] * static_cast<double>(prof.own[u]);
        out.scores[u] = hub + static_cast<double>(prof.neighbouring[u] * prof.outside[u]);
    }
    return out;
}

/// sum_m k_u^m * |m| / N.
inline CentralityVector community_based_centrality(const Graph &g, const Partition &m) {
    if (m.num_nodes() != g.num_nodes())
        throw ValidationError("partition does not match graph");
    const auto prof = ModuleLinkProfile::build(g, m);
    const auto n = static_cast<double>(g.num_nodes());
    CentralityVector out{"cbc", "", "", std::vector<double>(g.num_nodes(), 0.0)};
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (auto [x, k] : prof.per_node[u])
            out.scores[u] += static_cast<double>(k) * static_cast<double>(m.module(m.leaves()[x]).members.size()) / n;
    return out;
}

} // namespace mapcent
