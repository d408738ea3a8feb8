#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "flow.hpp"
#include "graph.hpp"
#include "mapeq.hpp"
#include "parallel.hpp"
#include "partition.hpp"

namespace mapcent {

struct SearchConfig {
    std::size_t num_runs = 100;
    std::uint64_t seed = 1;
    std::size_t max_sweeps = 100;
    double min_gain = 1e-10; ///< bits
    unsigned threads = 0;    ///< 0 = default_thread_count()
};

struct SearchResult {
    Partition partition;
    double codelength = 0.0;
    std::size_t best_run = 0;
};

namespace detail {

/// Flow network at one aggregation level. Self-flow of a super node is
/// internal to it and dropped.
struct FlowLevel {
    std::vector<double> rate, tele, target;
    std::vector<std::size_t> out_offset, in_offset;
    std::vector<Neighbor> out, in;
    std::vector<bool> movable;

    std::size_t size() const { return rate.size(); }

    static FlowLevel build(std::size_t n, const std::vector<Link> &flows, std::vector<double> rate,
                           std::vector<double> tele, std::vector<double> target) {
        FlowLevel lv;
        lv.rate = std::move(rate);
        lv.tele = tele.empty() ? std::vector<double>(n, 0.0) : std::move(tele);
        lv.target = target.empty() ? std::vector<double>(n, 0.0) : std::move(target);
        lv.movable.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            lv.movable[i] = lv.rate[i] > 0.0;
        lv.out_offset.assign(n + 1, 0);
        lv.in_offset.assign(n + 1, 0);
        for (const auto &l : flows)
            if (l.source != l.target && l.weight > 0.0) {
                ++lv.out_offset[l.source + 1];
                ++lv.in_offset[l.target + 1];
            }
        std::partial_sum(lv.out_offset.begin(), lv.out_offset.end(), lv.out_offset.begin());
        std::partial_sum(lv.in_offset.begin(), lv.in_offset.end(), lv.in_offset.begin());
        lv.out.resize(lv.out_offset[n]);
        lv.in.resize(lv.in_offset[n]);
        std::vector<std::size_t> op(lv.out_offset.begin(), lv.out_offset.end() - 1);
        std::vector<std::size_t> ip(lv.in_offset.begin(), lv.in_offset.end() - 1);
        for (const auto &l : flows)
            if (l.source != l.target && l.weight > 0.0) {
                lv.out[op[l.source]++] = {l.target, l.weight};
                lv.in[ip[l.target]++] = {l.source, l.weight};
            }
        return lv;
    }

    static FlowLevel from_flow(const FlowField &f) {
        return build(f.num_nodes(), f.link_flow, f.visit_rate, f.teleport_out, f.teleport_target);
    }

    /// Collapses modules (labels dense in [0, k)) into super nodes.
    FlowLevel aggregate(const std::vector<std::uint32_t> &module, std::size_t k) const {
        std::vector<double> r(k, 0.0), t(k, 0.0), a(k, 0.0);
        for (std::size_t i = 0; i < size(); ++i) {
            r[module[i]] += rate[i];
            t[module[i]] += tele[i];
            a[module[i]] += target[i];
        }
        std::vector<Link> flows;
        for (std::size_t i = 0; i < size(); ++i)
            for (auto e = out_offset[i]; e < out_offset[i + 1]; ++e) {
                const auto mu = module[i], mv = module[out[e].node];
                if (mu != mv)
                    flows.push_back({mu, mv, out[e].weight});
            }
        std::sort(flows.begin(), flows.end(), [](const Link &x, const Link &y) {
            return std::pair(x.source, x.target) < std::pair(y.source, y.target);
        });
        std::vector<Link> merged;
        for (const auto &l : flows) {
            if (!merged.empty() && merged.back().source == l.source && merged.back().target == l.target)
                merged.back().weight += l.weight;
            else
                merged.push_back(l);
        }
        return build(k, merged, std::move(r), std::move(t), std::move(a));
    }
};

/**
 * Local moving of super nodes between modules under the two-level map
 * equation (with exit codewords). Module rates are tracked incrementally:
 *   enter_m = link_enter_m + (T - tele_m) * target_m
 *   exit_m  = link_exit_m + tele_m * (1 - target_m)
 *   L = plogp(sum enter) - sum plogp(enter) - sum plogp(exit)
 *       + sum plogp(exit + rate) - sum_u plogp(p_u)
 */
class LocalMover {
public:
    LocalMover(const FlowLevel &level, std::vector<std::uint32_t> initial)
        : lv_(level), module_(std::move(initial)) {
        const auto n = lv_.size();
        mods_.assign(n, {});
        total_tele_ = std::accumulate(lv_.tele.begin(), lv_.tele.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto &m = mods_[module_[i]];
            m.rate += lv_.rate[i];
            m.tele += lv_.tele[i];
            m.target += lv_.target[i];
            ++m.size;
            for (auto e = lv_.out_offset[i]; e < lv_.out_offset[i + 1]; ++e)
                if (module_[lv_.out[e].node] != module_[i]) {
                    m.link_exit += lv_.out[e].weight;
                    mods_[module_[lv_.out[e].node]].link_enter += lv_.out[e].weight;
                }
        }
        for (std::uint32_t m = 0; m < n; ++m) {
            if (mods_[m].size == 0)
                empty_.push_back(m);
            sum_enter_ += enter(mods_[m]);
        }
        flow_to_.assign(n, 0.0);
        flow_from_.assign(n, 0.0);
        marked_.assign(n, 0);
    }

    /// Runs sweeps in shuffled order until no node moves. Returns the number
    /// of moves made.
    std::size_t run(std::mt19937_64 &rng, const SearchConfig &cfg) {
        std::vector<std::uint32_t> order(lv_.size());
        std::iota(order.begin(), order.end(), 0u);
        std::size_t total_moves = 0;
        for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
            std::shuffle(order.begin(), order.end(), rng);
            std::size_t moves = 0;
            for (auto v : order)
                if (lv_.movable[v] && try_move(v, cfg.min_gain))
                    ++moves;
            total_moves += moves;
            if (moves == 0)
                break;
        }
        return total_moves;
    }

    /// Dense relabelling of modules by first appearance; returns module count.
    std::size_t compact(std::vector<std::uint32_t> &labels) const {
        constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> remap(lv_.size(), unset);
        labels.resize(lv_.size());
        std::uint32_t next = 0;
        for (std::size_t i = 0; i < lv_.size(); ++i) {
            auto &r = remap[module_[i]];
            if (r == unset)
                r = next++;
            labels[i] = r;
        }
        return next;
    }

private:
    struct ModuleState {
        double rate = 0.0, tele = 0.0, target = 0.0;
        double link_exit = 0.0, link_enter = 0.0;
        std::size_t size = 0;
    };

    double enter(const ModuleState &m) const { return m.link_enter + (total_tele_ - m.tele) * m.target; }
    double exit(const ModuleState &m) const { return m.link_exit + m.tele * (1.0 - m.target); }
    double contribution(const ModuleState &m) const {
        const double x = exit(m);
        return -plogp(enter(m)) - plogp(x) + plogp(x + m.rate);
    }

    bool try_move(std::uint32_t v, double min_gain) {
        const auto from = module_[v];
        double out_total = 0.0, in_total = 0.0;
        touched_.clear();
        auto touch = [&](std::uint32_t m) {
            if (!marked_[m]) {
                marked_[m] = 1;
                touched_.push_back(m);
            }
        };
        for (auto e = lv_.out_offset[v]; e < lv_.out_offset[v + 1]; ++e) {
            const auto m = module_[lv_.out[e].node];
            touch(m);
            flow_to_[m] += lv_.out[e].weight;
            out_total += lv_.out[e].weight;
        }
        for (auto e = lv_.in_offset[v]; e < lv_.in_offset[v + 1]; ++e) {
            const auto m = module_[lv_.in[e].node];
            touch(m);
            flow_from_[m] += lv_.in[e].weight;
            in_total += lv_.in[e].weight;
        }

        const auto &old_from = mods_[from];
        ModuleState new_from = old_from;
        new_from.rate -= lv_.rate[v];
        new_from.tele -= lv_.tele[v];
        new_from.target -= lv_.target[v];
        new_from.link_exit += -(out_total - flow_to_[from]) + flow_from_[from];
        new_from.link_enter += -(in_total - flow_from_[from]) + flow_to_[from];
        --new_from.size;

        const double base_from = contribution(old_from), next_from = contribution(new_from);
        const double enter_after_leave = sum_enter_ - enter(old_from) + enter(new_from);

        std::uint32_t best = from;
        double best_delta = -min_gain;
        ModuleState best_state;

        auto consider = [&](std::uint32_t to) {
            const auto &old_to = mods_[to];
            ModuleState new_to = old_to;
            new_to.rate += lv_.rate[v];
            new_to.tele += lv_.tele[v];
            new_to.target += lv_.target[v];
            new_to.link_exit += (out_total - flow_to_[to]) - flow_from_[to];
            new_to.link_enter += (in_total - flow_from_[to]) - flow_to_[to];
            ++new_to.size;
            const double new_sum_enter = enter_after_leave - enter(old_to) + enter(new_to);
            const double delta = plogp(new_sum_enter) - plogp(sum_enter_) + next_from - base_from +
                                 contribution(new_to) - contribution(old_to);
            if (delta < best_delta) {
                best_delta = delta;
                best = to;
                best_state = new_to;
            }
        };
        for (auto m : touched_)
            if (m != from)
                consider(m);
        if (old_from.size > 1 && !empty_.empty())
            consider(empty_.back());

        for (auto m : touched_) {
            flow_to_[m] = flow_from_[m] = 0.0;
            marked_[m] = 0;
        }

        if (best == from)
            return false;
        if (mods_[best].size == 0)
            empty_.pop_back();
        sum_enter_ = enter_after_leave - enter(mods_[best]) + enter(best_state);
        mods_[from] = new_from;
        mods_[best] = best_state;
        if (new_from.size == 0) {
            mods_[from] = {};
            empty_.push_back(from);
        }
        module_[v] = best;
        return true;
    }

    const FlowLevel &lv_;
    std::vector<std::uint32_t> module_;
    std::vector<ModuleState> mods_;
    std::vector<std::uint32_t> empty_;
    std::vector<std::uint32_t> touched_;
    std::vector<double> flow_to_, flow_from_;
    std::vector<char> marked_;
    double total_tele_ = 0.0;
    double sum_enter_ = 0.0;
};

/// Repeated local moving + aggregation from `start` (labels dense over the
/// level's nodes). Returns final dense module labels of the base nodes.
inline std::vector<std::uint32_t> coarsen(const FlowLevel &base, std::vector<std::uint32_t> start,
                                          std::mt19937_64 &rng, const SearchConfig &cfg) {
    std::vector<std::uint32_t> assignment(base.size());
    std::iota(assignment.begin(), assignment.end(), 0u);

    FlowLevel current = base;
    std::vector<std::uint32_t> init = std::move(start);
    while (true) {
        LocalMover mover(current, std::move(init));
        mover.run(rng, cfg);
        std::vector<std::uint32_t> labels;
        const auto k = mover.compact(labels);
        for (auto &a : assignment)
            a = labels[a];
        if (k == current.size())
            break;
        current = current.aggregate(labels, k);
        init.resize(k);
        std::iota(init.begin(), init.end(), 0u);
    }
    return assignment;
}

inline Partition partition_from_dense(const std::vector<std::uint32_t> &dense) {
    std::vector<std::uint32_t> labels(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i)
        labels[i] = dense[i] + 1;
    return Partition::from_labels(labels);
}

/// One seeded search: coarsening from singletons, then alternating node-level
/// refinement and re-coarsening while the codelength keeps dropping.
inline std::pair<Partition, double> search_once(const FlowField &f, const FlowLevel &base,
                                                std::uint64_t seed, const SearchConfig &cfg) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> start(base.size());
    std::iota(start.begin(), start.end(), 0u);
    auto labels = coarsen(base, start, rng, cfg);
    Partition best = partition_from_dense(labels);
    double best_len = codelength(f, best);

    for (int round = 0; round < 10; ++round) {
        LocalMover refine(base, labels);
        if (refine.run(rng, cfg) == 0)
            break;
        std::vector<std::uint32_t> refined;
        const auto k = refine.compact(refined);
        auto merged = base.aggregate(refined, k);
        std::vector<std::uint32_t> super_start(k);
        std::iota(super_start.begin(), super_start.end(), 0u);
        auto super_labels = coarsen(merged, super_start, rng, cfg);
        std::vector<std::uint32_t> next(base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            next[i] = super_labels[refined[i]];
        Partition candidate = partition_from_dense(next);
        const double len = codelength(f, candidate);
        if (!(len < best_len - cfg.min_gain))
            break;
        best = std::move(candidate);
        best_len = len;
        labels = std::move(next);
    }
    return {std::move(best), best_len};
}

} // namespace detail

/**
 * Greedy two-level map equation search; the best of cfg.num_runs seeded
 * runs is returned (ties go to the lowest run index). Zero-rate nodes stay
 * in singleton modules. The result never codes worse than one module.
 */
inline SearchResult optimize_two_level(const FlowField &f, const SearchConfig &cfg = {}) {
    if (cfg.num_runs == 0)
        throw ValidationError("num_runs must be at least 1");
    if (cfg.min_gain < 0.0)
        throw ValidationError("min_gain must be non-negative");
    const auto n = f.num_nodes();
    if (n == 0)
        throw ValidationError("cannot partition an empty flow field");

    const auto base = detail::FlowLevel::from_flow(f);
    std::vector<std::pair<Partition, double>> runs(cfg.num_runs);
    parallel_for(
        cfg.num_runs,
        [&](std::size_t r) { runs[r] = detail::search_once(f, base, derive_seed(cfg.seed, r), cfg); },
        cfg.threads);

    SearchResult result;
    result.codelength = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < runs.size(); ++r)
        if (runs[r].second < result.codelength) {
            result.codelength = runs[r].second;
            result.partition = std::move(runs[r].first);
            result.best_run = r;
        }

    // One module for every positive-rate node, singletons for the rest.
    std::vector<std::uint32_t> labels(n);
    std::uint32_t next = 2;
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = f.visit_rate[i] > 0.0 ? 1 : next++;
    auto trivial = Partition::from_labels(labels);
    const double trivial_len = codelength(f, trivial);
    if (trivial_len <= result.codelength) {
        result.partition = std::move(trivial);
        result.codelength = trivial_len;
    }
    return result;
}

inline SearchResult optimize_two_level(const Graph &, const FlowField &f, const SearchConfig &cfg = {}) {
    return optimize_two_level(f, cfg);
}

// ---------------------------------------------------------------------------
// Partition statistics

/// 2^H of the relative leaf-module sizes.
inline double effective_num_modules(const Partition &m) {
    const auto n = static_cast<double>(m.num_nodes());
    if (n == 0)
        throw ValidationError("effective number of modules of an empty partition");
    double h = 0.0;
    for (auto leaf : m.leaves())
        h -= plogp(static_cast<double>(m.module(leaf).members.size()) / n);
    return std::exp2(h);
}

/// Fraction of links (unweighted) whose endpoints sit in different leaf modules.
inline double mixing(const Graph &g, const Partition &m) {
    if (g.num_links() == 0)
        throw ValidationError("mixing needs at least one link");
    std::size_t cut = 0;
    for (const auto &l : g.links())
        if (m.leaf_of(l.source) != m.leaf_of(l.target))
            ++cut;
    return static_cast<double>(cut) / static_cast<double>(g.num_links());
}

/// Newman-Girvan modularity over leaf modules (weighted; directed variant
/// uses in/out strengths).
inline double modularity(const Graph &g, const Partition &m) {
    if (m.num_nodes() != g.num_nodes())
        throw ValidationError("partition does not match graph");
    const double total = g.total_weight();
    if (!(total > 0.0))
        throw ValidationError("modularity needs at least one link");
    const auto k = m.modules().size();
    std::vector<double> internal(k, 0.0), d_out(k, 0.0), d_in(k, 0.0);
    for (const auto &l : g.links())
        if (m.leaf_of(l.source) == m.leaf_of(l.target))
            internal[m.leaf_of(l.source)] += l.weight;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        d_out[m.leaf_of(u)] += g.out_strength(u);
        d_in[m.leaf_of(u)] += g.in_strength(u);
    }
    double q = 0.0;
    for (auto leaf : m.leaves()) {
        if (g.directed())
            q += internal[leaf] / total - d_out[leaf] * d_in[leaf] / (total * total);
        else {
            const double frac = d_out[leaf] / (2.0 * total);
            q += internal[leaf] / total - frac * frac;
        }
    }
    return q;
}

} // namespace mapcent
