#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"
#include "flow.hpp"
#include "graph.hpp"
#include "mapeq.hpp"
#include "parallel.hpp"
#include "partition.hpp"
#include "partitioning.hpp"

namespace mapcent {

/**
 * Kendall's tau-b between two score vectors, O(n log n) (Knight's
 * algorithm). Throws ComputationError when either side is constant.
 */
inline double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
    const auto n = a.size();
    if (b.size() != n)
        throw ValidationError("score vectors differ in length");
    if (n < 2)
        throw ValidationError("kendall tau needs at least two items");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]);
    });

    auto pairs = [](std::int64_t t) { return t * (t - 1) / 2; };
    const auto total = pairs(static_cast<std::int64_t>(n));
    std::int64_t ties_a = 0, ties_ab = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && a[idx[j]] == a[idx[i]])
            ++j;
        ties_a += pairs(static_cast<std::int64_t>(j - i));
        for (std::size_t k = i; k < j;) {
            std::size_t l = k;
            while (l < j && b[idx[l]] == b[idx[k]])
                ++l;
            ties_ab += pairs(static_cast<std::int64_t>(l - k));
            k = l;
        }
        i = j;
    }

    // Merge sort by b, counting inversions (discordant pairs).
    std::vector<double> keys(n), buffer(n);
    for (std::size_t i = 0; i < n; ++i)
        keys[i] = b[idx[i]];
    std::int64_t swaps = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo < n; lo += 2 * width) {
            const auto mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (keys[j] < keys[i]) {
                    buffer[k++] = keys[j++];
                    swaps += static_cast<std::int64_t>(mid - i);
                } else {
                    buffer[k++] = keys[i++];
                }
            }
            while (i < mid)
                buffer[k++] = keys[i++];
            while (j < hi)
                buffer[k++] = keys[j++];
        }
        keys.swap(buffer);
    }

    std::int64_t ties_b = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && keys[j] == keys[i])
            ++j;
        ties_b += pairs(static_cast<std::int64_t>(j - i));
        i = j;
    }

    if (ties_a == total || ties_b == total)
        throw ComputationError("kendall tau undefined: all scores tied");
    const auto concordant_minus_discordant = total - ties_a - ties_b + ties_ab - 2 * swaps;
    return static_cast<double>(concordant_minus_discordant) /
           std::sqrt(static_cast<double>(total - ties_a) * static_cast<double>(total - ties_b));
}

namespace detail {

inline double entropy_of_counts(const std::vector<std::size_t> &counts, double n) {
    double h = 0.0;
    for (auto c : counts)
        if (c)
            h -= (static_cast<double>(c) / n) * std::log(static_cast<double>(c) / n);
    return h;
}

} // namespace detail

/**
 * Adjusted mutual information with the expected mutual information taken
 * under the hypergeometric (permutation) model and arithmetic-mean
 * normalisation. Labels may be arbitrary non-negative integers.
 */
inline double adjusted_mutual_information(std::span<const std::uint32_t> la, std::span<const std::uint32_t> lb) {
    const auto n = la.size();
    if (lb.size() != n)
        throw ValidationError("label vectors differ in length");
    if (n == 0)
        throw ValidationError("AMI of empty labelings");

    auto dense = [](std::span<const std::uint32_t> l) {
        std::vector<std::uint32_t> sorted(l.begin(), l.end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<std::uint32_t> out(l.size());
        for (std::size_t i = 0; i < l.size(); ++i)
            out[i] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), l[i]) - sorted.begin());
        return std::pair(out, sorted.size());
    };
    const auto [a, ra] = dense(la);
    const auto [b, rb] = dense(lb);

    std::vector<std::size_t> row(ra, 0), col(rb, 0);
    std::vector<std::pair<std::uint64_t, std::size_t>> cells;
    {
        std::vector<std::uint64_t> keys(n);
        for (std::size_t i = 0; i < n; ++i) {
            ++row[a[i]];
            ++col[b[i]];
            keys[i] = static_cast<std::uint64_t>(a[i]) * rb + b[i];
        }
        std::sort(keys.begin(), keys.end());
        for (auto k : keys) {
            if (!cells.empty() && cells.back().first == k)
                ++cells.back().second;
            else
                cells.emplace_back(k, 1);
        }
    }

    // Identical groupings score 1, including the degenerate cases where the
    // normaliser vanishes (single cluster or all singletons on both sides).
    const bool identical = cells.size() == ra && cells.size() == rb;
    const double N = static_cast<double>(n);
    const double ha = detail::entropy_of_counts(row, N), hb = detail::entropy_of_counts(col, N);

    double mi = 0.0;
    for (const auto &[key, count] : cells) {
        const auto i = key / rb, j = key % rb;
        const double c = static_cast<double>(count);
        mi += c / N * std::log(N * c / (static_cast<double>(row[i]) * static_cast<double>(col[j])));
    }

    double emi = 0.0;
    const double lg_n = std::lgamma(N + 1.0);
    for (std::size_t i = 0; i < ra; ++i) {
        const double ai = static_cast<double>(row[i]);
        for (std::size_t j = 0; j < rb; ++j) {
            const double bj = static_cast<double>(col[j]);
            const double lg_fixed = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(N - ai + 1.0) +
                                    std::lgamma(N - bj + 1.0) - lg_n;
            const auto lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(row[i] + col[j]) - static_cast<std::int64_t>(n));
            const auto hi = static_cast<std::int64_t>(std::min(row[i], col[j]));
            for (std::int64_t k = lo; k <= hi; ++k) {
                const double nij = static_cast<double>(k);
                const double log_p = lg_fixed - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                                     std::lgamma(bj - nij + 1.0) - std::lgamma(N - ai - bj + nij + 1.0);
                emi += nij / N * std::log(N * nij / (ai * bj)) * std::exp(log_p);
            }
        }
    }

    const double denom = 0.5 * (ha + hb) - emi;
    if (std::abs(denom) < 1e-15)
        return identical ? 1.0 : 0.0;
    if (identical)
        return 1.0;
    return (mi - emi) / denom;
}

inline double adjusted_mutual_information(const Partition &pa, const Partition &pb) {
    const auto a = pa.leaf_labels(), b = pb.leaf_labels();
    return adjusted_mutual_information(std::span<const std::uint32_t>(a), std::span<const std::uint32_t>(b));
}

// ---------------------------------------------------------------------------
// Rewiring experiment

struct RewiringRecord {
    double r = 0.0;
    double ami = 0.0;
    double tau = 0.0;
    double mu = 0.0;
    double num_modules = 0.0;       ///< mean leaf-module count
    double effective_modules = 0.0; ///< mean perplexity of module sizes
    std::size_t repeats = 0;
};

struct RewiringOptions {
    FlowModel flow = FlowModel::raw_undirected;
    double teleport_rate = 0.15;
    Convention convention = Convention::with_exit;
    RewireModel rewire_model = RewireModel::uniform;
    unsigned threads = 0;
};

/**
 * For each r and repeat: rewire, detect modules, and compare against the
 * ground truth. tau compares map equation centrality under the ground-truth
 * partition with centrality under the detected partition, both on the
 * rewired graph. Repeat 0 searches with cfg.seed itself, so r = 0 with one
 * repeat matches a plain detection on g.
 */
inline std::vector<RewiringRecord> rewiring_experiment(const Graph &g, const Partition &truth,
                                                       std::span<const double> r_values, std::size_t repeats,
                                                       const SearchConfig &cfg, const RewiringOptions &opt = {}) {
    if (truth.num_nodes() != g.num_nodes())
        throw ValidationError("ground-truth partition does not cover the graph");
    if (repeats == 0)
        throw ValidationError("repeats must be at least 1");

    struct Sample {
        double ami, tau, mu, modules, effective;
    };
    const auto jobs = r_values.size() * repeats;
    std::vector<Sample> samples(jobs);
    parallel_for(
        jobs,
        [&](std::size_t job) {
            const auto ri = job / repeats, rep = job % repeats;
            const auto rewired = rewire(g, r_values[ri], derive_seed(cfg.seed, 0x7265'7769'7265ULL, ri, rep),
                                        opt.rewire_model);
            const auto flow = compute_flow(rewired, opt.flow, opt.teleport_rate);
            SearchConfig search = cfg;
            search.seed = rep == 0 ? cfg.seed : derive_seed(cfg.seed, rep);
            search.threads = 1;
            const auto detected = optimize_two_level(flow, search);
            const auto truth_scores = mec_all(aggregate_partition_flows(flow, truth, opt.convention));
            const auto found_scores = mec_all(aggregate_partition_flows(flow, detected.partition, opt.convention));
            samples[job] = {adjusted_mutual_information(detected.partition, truth),
                            kendall_tau_b(truth_scores.scores, found_scores.scores),
                            mixing(rewired, detected.partition),
                            static_cast<double>(detected.partition.num_leaf_modules()),
                            effective_num_modules(detected.partition)};
        },
        opt.threads);

    std::vector<RewiringRecord> out;
    out.reserve(r_values.size());
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
        RewiringRecord rec;
        rec.r = r_values[ri];
        rec.repeats = repeats;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            const auto &s = samples[ri * repeats + rep];
            rec.ami += s.ami;
            rec.tau += s.tau;
            rec.mu += s.mu;
            rec.num_modules += s.modules;
            rec.effective_modules += s.effective;
        }
        const auto k = static_cast<double>(repeats);
        rec.ami /= k;
        rec.tau /= k;
        rec.mu /= k;
        rec.num_modules /= k;
        rec.effective_modules /= k;
        out.push_back(rec);
    }
    return out;
}

} // namespace mapcent
