#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <mapcent/graph.hpp>
#include <mapcent/partition.hpp>

namespace mapcent::test {

inline constexpr const char *toy8_edges = "1 2\n1 3\n1 4\n2 4\n3 4\n4 5\n5 6\n5 7\n6 7\n5 8\n";

/// Nodes are labelled "1".."8" and get dense ids 0..7 in that order.
inline Graph toy8() { return parse_edge_list(toy8_edges, false); }

inline Partition partition_of(const std::vector<std::uint32_t> &labels) { return Partition::from_labels(labels); }

inline Partition toy8_opt() { return partition_of({1, 1, 1, 1, 2, 2, 2, 2}); }
inline Partition toy8_sub() { return partition_of({1, 1, 1, 2, 2, 2, 2, 2}); }
inline Partition toy8_one() { return Partition::one_level(8); }

/// G(n, p) with at least one link; unit weights unless `weighted`.
inline Graph random_graph(std::mt19937_64 &rng, NodeId n, double p, bool directed = false, bool weighted = false) {
    std::bernoulli_distribution coin(p);
    std::uniform_real_distribution<double> weight(0.5, 3.0);
    std::vector<Link> links;
    while (links.empty()) {
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = directed ? 0 : u + 1; v < n; ++v)
                if (u != v && coin(rng))
                    links.push_back({u, v, weighted ? weight(rng) : 1.0});
    }
    return Graph::from_links(n, std::move(links), directed);
}

/// Connected undirected graph: a random spanning tree plus G(n, p) extras.
inline Graph random_connected_graph(std::mt19937_64 &rng, NodeId n, double p, bool weighted = false) {
    std::bernoulli_distribution coin(p);
    std::uniform_real_distribution<double> weight(0.5, 3.0);
    std::vector<Link> links;
    for (NodeId v = 1; v < n; ++v) {
        std::uniform_int_distribution<NodeId> parent(0, v - 1);
        links.push_back({parent(rng), v, weighted ? weight(rng) : 1.0});
    }
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (coin(rng))
                links.push_back({u, v, weighted ? weight(rng) : 1.0});
    return Graph::from_links(n, std::move(links), false);
}

inline Partition random_partition(std::mt19937_64 &rng, std::size_t n, std::uint32_t max_modules) {
    std::uniform_int_distribution<std::uint32_t> pick(1, max_modules);
    std::vector<std::uint32_t> labels(n);
    for (auto &l : labels)
        l = pick(rng);
    return Partition::from_labels(labels);
}

} // namespace mapcent::test
