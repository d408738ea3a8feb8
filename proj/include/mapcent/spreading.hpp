#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "mapeq.hpp"
#include "parallel.hpp"
#include "partition.hpp"

namespace mapcent {

/// Which neighbours exert influence in directed linear threshold runs.
enum class LtDirection { in_neighbors, out_neighbors };

struct LtConfig {
    double threshold = 0.5;
    double seed_fraction = 0.05;
    LtDirection direction = LtDirection::in_neighbors;
};

struct SirConfig {
    double infection_probability = 0.1;
    std::size_t repetitions = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct SpreadOutcome {
    double value = 0.0;               ///< activation size (LT) or mean recovered count (SIR)
    std::vector<std::size_t> counts;  ///< final active count (LT) or recovered count per run (SIR)
    std::size_t steps = 0;            ///< rounds until the fixed point (LT) or longest epidemic (SIR)
};

/// Number of top entries selected for fraction x of n items: ceil(x n),
/// with a small slack so that e.g. 0.01 * 100 selects exactly one.
inline std::size_t top_count(double x, std::size_t n) {
    if (!(x >= 0.0 && x <= 1.0))
        throw ValidationError("fraction must lie in [0, 1]");
    const double k = std::ceil(x * static_cast<double>(n) - 1e-9);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n)));
}

/**
 * Synchronous linear threshold cascade with a uniform threshold.
 *
 * Each round, every inactive node with at least one (in-)neighbour becomes
 * active if the fraction of its active neighbours is at least `threshold`.
 * Seeds count as active from the start. Stops at the fixed point.
 */
inline SpreadOutcome linear_threshold(const Graph &g, std::span<const NodeId> seeds, double threshold,
                                      LtDirection direction = LtDirection::in_neighbors) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ValidationError("threshold must lie in (0, 1]");
    const auto n = g.num_nodes();
    std::vector<char> active(n, 0);
    std::size_t count = 0;
    for (auto s : seeds) {
        if (s >= n)
            throw ValidationError("seed node out of range");
        if (!active[s]) {
            active[s] = 1;
            ++count;
        }
    }
    auto influencers = [&](NodeId v) {
        return direction == LtDirection::in_neighbors ? g.in_neighbors(v) : g.out_neighbors(v);
    };

    SpreadOutcome out;
    std::vector<NodeId> newly;
    while (count < n) {
        newly.clear();
        for (NodeId v = 0; v < n; ++v) {
            if (active[v])
                continue;
            const auto nb = influencers(v);
            if (nb.empty())
                continue;
            std::size_t on = 0;
            for (const auto &x : nb)
                on += active[x.node] ? 1 : 0;
            if (static_cast<double>(on) >= threshold * static_cast<double>(nb.size()))
                newly.push_back(v);
        }
        if (newly.empty())
            break;
        for (auto v : newly)
            active[v] = 1;
        count += newly.size();
        ++out.steps;
    }
    out.value = n ? static_cast<double>(count) / static_cast<double>(n) : 0.0;
    out.counts = {count};
    return out;
}

/// One discrete-time SIR epidemic from `seed`: infected nodes try each
/// susceptible out-neighbour once with probability p, then recover.
/// Returns the number of recovered nodes and writes the epidemic length.
template <typename Rng>
std::size_t sir_run(const Graph &g, NodeId seed, double p, Rng &rng, std::vector<char> &state,
                    std::size_t *steps = nullptr) {
    enum : char { susceptible = 0, infected = 1, recovered = 2 };
    std::fill(state.begin(), state.end(), susceptible);
    std::bernoulli_distribution infect(p);
    std::vector<NodeId> current{seed}, next;
    state[seed] = infected;
    std::size_t recovered_count = 0, t = 0;
    while (!current.empty()) {
        next.clear();
        for (auto u : current)
            for (const auto &nb : g.out_neighbors(u))
                if (state[nb.node] == susceptible && infect(rng)) {
                    state[nb.node] = infected;
                    next.push_back(nb.node);
                }
        for (auto u : current)
            state[u] = recovered;
        recovered_count += current.size();
        current.swap(next);
        ++t;
    }
    if (steps)
        *steps = t;
    return recovered_count;
}

/// Repeated single-seed SIR runs; run r uses a generator seeded from
/// (cfg.seed, node, r), so results do not depend on scheduling.
inline SpreadOutcome sir_simulate(const Graph &g, NodeId u, const SirConfig &cfg) {
    if (u >= g.num_nodes())
        throw ValidationError("seed node out of range");
    if (cfg.repetitions == 0)
        throw ValidationError("repetitions must be at least 1");
    const double p = std::clamp(cfg.infection_probability, 0.0, 1.0);
    SpreadOutcome out;
    out.counts.resize(cfg.repetitions);
    std::vector<char> state(g.num_nodes());
    double sum = 0.0;
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        std::mt19937_64 rng(derive_seed(cfg.seed, u, r));
        std::size_t steps = 0;
        out.counts[r] = sir_run(g, u, p, rng, state, &steps);
        out.steps = std::max(out.steps, steps);
        sum += static_cast<double>(out.counts[r]);
    }
    out.value = sum / static_cast<double>(cfg.repetitions);
    return out;
}

/// Mean number of recovered nodes over cfg.repetitions runs seeded at u.
inline double sir_spreading_power(const Graph &g, NodeId u, const SirConfig &cfg) {
    return sir_simulate(g, u, cfg).value;
}

/// Spreading power of every node, parallel over nodes.
inline std::vector<double> sir_spreading_powers(const Graph &g, const SirConfig &cfg) {
    std::vector<double> power(g.num_nodes());
    parallel_for(
        g.num_nodes(), [&](std::size_t u) { power[u] = sir_spreading_power(g, static_cast<NodeId>(u), cfg); },
        cfg.threads);
    return power;
}

/**
 * 1 - M_c / M_SIR: M_c is the mean power of the first ceil(x n) nodes of
 * `ranked`, M_SIR the mean of the ceil(x n) largest powers. Not clamped.
 */
inline double imprecision(std::span<const NodeId> ranked, std::span<const double> power, double x) {
    const auto n = power.size();
    if (ranked.size() != n)
        throw ValidationError("ranking and power vectors differ in length");
    const auto k = top_count(x, n);
    if (k == 0)
        throw ValidationError("fraction selects no nodes");
    double chosen = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        chosen += power[ranked[i]];
    std::vector<double> sorted(power.begin(), power.end());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(),
                      std::greater<>());
    double best = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        best += sorted[i];
    if (best <= 0.0)
        throw ComputationError("top spreaders have zero power");
    return 1.0 - chosen / best;
}

/// 2^H of how the selected nodes spread over leaf modules.
inline double selection_perplexity(const Partition &m, std::span<const NodeId> selected) {
    if (selected.empty())
        throw ValidationError("selection must be non-empty");
    std::vector<std::size_t> count(m.modules().size(), 0);
    for (auto u : selected) {
        if (u >= m.num_nodes())
            throw ValidationError("selected node out of range");
        ++count[m.leaf_of(u)];
    }
    const auto total = static_cast<double>(selected.size());
    double h = 0.0;
    for (auto c : count)
        h -= plogp(static_cast<double>(c) / total);
    return std::exp2(h);
}

} // namespace mapcent
