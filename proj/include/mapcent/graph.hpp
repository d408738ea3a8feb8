#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mapcent {

using NodeId = std::uint32_t;

struct Neighbor {
    NodeId node;
    double weight;
};

struct Link {
    NodeId source;
    NodeId target;
    double weight;

    friend bool operator==(const Link &, const Link &) = default;
};

/**
 * Weighted sparse network with dense node ids and immutable adjacency.
 *
 * Undirected links are stored once in links() (source < target) and exposed
 * symmetrically through the adjacency views, so out_neighbors == in_neighbors.
 */
class Graph {
public:
    Graph() = default;

    /// Builds a graph from raw links. Self-loops are dropped and counted,
    /// parallel links merged by summing weights. Throws ValidationError on
    /// non-positive weights or out-of-range ids.
    static Graph from_links(std::vector<std::string> labels, std::vector<Link> raw,
                            bool directed) {
        Graph g;
        g.directed_ = directed;
        g.labels_ = std::move(labels);
        const auto n = static_cast<NodeId>(g.labels_.size());

        for (auto &l : raw) {
            if (l.source >= n || l.target >= n)
                throw ValidationError("link endpoint out of range");
            if (!(l.weight > 0.0) || !std::isfinite(l.weight))
                throw ValidationError("link weight must be positive and finite");
            if (!directed && l.source > l.target)
                std::swap(l.source, l.target);
        }
        std::erase_if(raw, [&](const Link &l) {
            if (l.source == l.target) {
                ++g.self_loops_dropped_;
                return true;
            }
            return false;
        });
        std::stable_sort(raw.begin(), raw.end(), [](const Link &a, const Link &b) {
            return std::pair(a.source, a.target) < std::pair(b.source, b.target);
        });
        for (const auto &l : raw) {
            if (!g.links_.empty() && g.links_.back().source == l.source &&
                g.links_.back().target == l.target)
                g.links_.back().weight += l.weight;
            else
                g.links_.push_back(l);
        }
        g.build_adjacency();
        g.index_.reserve(n);
        for (NodeId i = 0; i < n; ++i)
            g.index_.emplace(g.labels_[i], i);
        return g;
    }

    /// Graph on nodes labelled "0".."n-1".
    static Graph from_links(NodeId n, std::vector<Link> raw, bool directed) {
        std::vector<std::string> labels(n);
        for (NodeId i = 0; i < n; ++i)
            labels[i] = std::to_string(i);
        return from_links(std::move(labels), std::move(raw), directed);
    }

    std::size_t num_nodes() const noexcept { return labels_.size(); }
    std::size_t num_links() const noexcept { return links_.size(); }
    bool directed() const noexcept { return directed_; }
    double total_weight() const noexcept { return total_weight_; }
    std::size_t self_loops_dropped() const noexcept { return self_loops_dropped_; }

    const std::vector<Link> &links() const noexcept { return links_; }
    const std::vector<std::string> &labels() const noexcept { return labels_; }
    const std::string &label(NodeId u) const { return labels_[u]; }

    std::optional<NodeId> find(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    std::span<const Neighbor> out_neighbors(NodeId u) const {
        return {out_.data() + out_offset_[u], out_.data() + out_offset_[u + 1]};
    }
    std::span<const Neighbor> in_neighbors(NodeId u) const {
        if (!directed_)
            return out_neighbors(u);
        return {in_.data() + in_offset_[u], in_.data() + in_offset_[u + 1]};
    }

    double out_strength(NodeId u) const noexcept { return out_strength_[u]; }
    double in_strength(NodeId u) const noexcept {
        return directed_ ? in_strength_[u] : out_strength_[u];
    }
    double strength(NodeId u) const noexcept { return out_strength(u); }

    /// Unweighted total degree (in + out for directed graphs).
    std::size_t degree(NodeId u) const noexcept {
        const auto out = out_offset_[u + 1] - out_offset_[u];
        if (!directed_)
            return out;
        return out + (in_offset_[u + 1] - in_offset_[u]);
    }

    bool has_link(NodeId u, NodeId v) const {
        if (!directed_ && u > v)
            std::swap(u, v);
        const auto nb = out_neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), Neighbor{v, 0.0},
                                  [](const Neighbor &a, const Neighbor &b) { return a.node < b.node; });
    }

private:
    void build_adjacency() {
        const std::size_t n = labels_.size();
        out_offset_.assign(n + 1, 0);
        in_offset_.assign(directed_ ? n + 1 : 0, 0);
        out_strength_.assign(n, 0.0);
        in_strength_.assign(directed_ ? n : 0, 0.0);
        total_weight_ = 0.0;

        for (const auto &l : links_) {
            ++out_offset_[l.source + 1];
            if (directed_)
                ++in_offset_[l.target + 1];
            else
                ++out_offset_[l.target + 1];
            total_weight_ += l.weight;
        }
        std::partial_sum(out_offset_.begin(), out_offset_.end(), out_offset_.begin());
        if (directed_)
            std::partial_sum(in_offset_.begin(), in_offset_.end(), in_offset_.begin());

        out_.resize(out_offset_[n]);
        in_.resize(directed_ ? in_offset_[n] : 0);
        std::vector<std::size_t> out_pos(out_offset_.begin(), out_offset_.end() - 1);
        std::vector<std::size_t> in_pos;
        if (directed_)
            in_pos.assign(in_offset_.begin(), in_offset_.end() - 1);

        for (const auto &l : links_) {
            out_[out_pos[l.source]++] = {l.target, l.weight};
            out_strength_[l.source] += l.weight;
            if (directed_) {
                in_[in_pos[l.target]++] = {l.source, l.weight};
                in_strength_[l.target] += l.weight;
            } else {
                out_[out_pos[l.target]++] = {l.source, l.weight};
                out_strength_[l.target] += l.weight;
            }
        }
        auto by_node = [](const Neighbor &a, const Neighbor &b) { return a.node < b.node; };
        for (std::size_t u = 0; u < n; ++u) {
            std::sort(out_.begin() + out_offset_[u], out_.begin() + out_offset_[u + 1], by_node);
            if (directed_)
                std::sort(in_.begin() + in_offset_[u], in_.begin() + in_offset_[u + 1], by_node);
        }
    }

    bool directed_ = false;
    std::vector<std::string> labels_;
    std::vector<Link> links_;
    std::vector<std::size_t> out_offset_{0}, in_offset_{0};
    std::vector<Neighbor> out_, in_;
    std::vector<double> out_strength_, in_strength_;
    double total_weight_ = 0.0;
    std::size_t self_loops_dropped_ = 0;
    std::unordered_map<std::string, NodeId> index_;
};

// ---------------------------------------------------------------------------
// Edge-list I/O

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const auto start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

} // namespace detail

/// Parses "source target [weight]" lines. Lines starting with '#' and blank
/// lines are skipped; ids are assigned in order of first appearance.
inline Graph parse_edge_list(std::istream &in, bool directed) {
    std::vector<std::string> labels;
    std::unordered_map<std::string, NodeId> ids;
    std::vector<Link> links;
    auto intern = [&](std::string_view label) {
        auto [it, inserted] = ids.try_emplace(std::string(label), static_cast<NodeId>(labels.size()));
        if (inserted)
            labels.emplace_back(label);
        return it->second;
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#')
            continue;
        if (tokens.size() < 2 || tokens.size() > 3)
            throw ParseError("expected 'source target [weight]'", lineno);
        double w = 1.0;
        if (tokens.size() == 3) {
            auto parsed = detail::parse_double(tokens[2]);
            if (!parsed)
                throw ParseError("weight is not a number: '" + std::string(tokens[2]) + "'", lineno);
            if (!(*parsed > 0.0) || !std::isfinite(*parsed))
                throw ValidationError("line " + std::to_string(lineno) + ": weight must be positive");
            w = *parsed;
        }
        const NodeId u = intern(tokens[0]);
        const NodeId v = intern(tokens[1]);
        links.push_back({u, v, w});
    }
    return Graph::from_links(std::move(labels), std::move(links), directed);
}

inline Graph parse_edge_list(std::string_view text, bool directed) {
    std::istringstream in{std::string(text)};
    return parse_edge_list(in, directed);
}

/// Writes "label label weight" lines in dense-id order.
namespace detail {

/// Numeric labels compare by value (length first), everything else lexically.
inline bool label_less(std::string_view a, std::string_view b) {
    auto digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    if (digits(a) && digits(b) && a.size() != b.size())
        return a.size() < b.size();
    return a < b;
}

} // namespace detail

/// One "source target weight" line per link, ordered by label so that the
/// text does not depend on internal ids; parse followed by write is a fixed
/// point. Undirected links print the smaller label first.
inline void write_edge_list(std::ostream &out, const Graph &g) {
    struct Row {
        std::string_view a, b;
        double w;
    };
    std::vector<Row> rows;
    rows.reserve(g.num_links());
    for (const auto &l : g.links()) {
        std::string_view a = g.label(l.source), b = g.label(l.target);
        if (!g.directed() && detail::label_less(b, a))
            std::swap(a, b);
        rows.push_back({a, b, l.weight});
    }
    std::sort(rows.begin(), rows.end(), [](const Row &x, const Row &y) {
        if (x.a != y.a)
            return detail::label_less(x.a, y.a);
        return detail::label_less(x.b, y.b);
    });
    char buf[64];
    for (const auto &r : rows) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r.w);
        out << r.a << ' ' << r.b << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Degree statistics

struct DegreeStats {
    double mean_degree = 0.0;        ///< <k>
    double mean_square_degree = 0.0; ///< <k^2>
};

/// Moments of the unweighted total-degree sequence.
inline DegreeStats degree_stats(const Graph &g) {
    DegreeStats s;
    const auto n = g.num_nodes();
    if (n == 0)
        return s;
    for (NodeId u = 0; u < n; ++u) {
        const auto k = static_cast<double>(g.degree(u));
        s.mean_degree += k;
        s.mean_square_degree += k * k;
    }
    s.mean_degree /= static_cast<double>(n);
    s.mean_square_degree /= static_cast<double>(n);
    return s;
}

/// <k> / (<k^2> - <k>). Values above 1 are returned unclamped.
inline double epidemic_threshold(const Graph &g) {
    if (g.num_links() == 0)
        throw ValidationError("epidemic threshold needs at least one link");
    const auto s = degree_stats(g);
    const double denom = s.mean_square_degree - s.mean_degree;
    if (denom <= 0.0)
        throw ComputationError("epidemic threshold undefined: <k^2> == <k>");
    return s.mean_degree / denom;
}

// ---------------------------------------------------------------------------
// Rewiring

enum class RewireModel { uniform, degree_preserving };

/**
 * Replaces floor(r * |E|) uniformly chosen links.
 *
 * uniform: each selected link is re-drawn between a uniformly random ordered
 * pair of distinct nodes. degree_preserving: each selected link is swapped
 * with another random link (a-b, c-d -> a-d, c-b). Either way self-loops and
 * duplicates are rejected and resampled up to `max_retries` times per link.
 * Weights travel with the link.
 */
inline Graph rewire(const Graph &g, double r, std::uint64_t seed,
                    RewireModel model = RewireModel::uniform, std::size_t max_retries = 1000) {
    if (!(r >= 0.0 && r <= 1.0))
        throw ValidationError("rewiring fraction must lie in [0, 1]");
    std::vector<Link> links = g.links();
    const auto m = links.size();
    const auto count = static_cast<std::size_t>(std::floor(r * static_cast<double>(m)));
    if (count == 0)
        return g;
    const auto n = static_cast<NodeId>(g.num_nodes());
    const bool directed = g.directed();

    auto key = [directed](NodeId u, NodeId v) {
        if (!directed && u > v)
            std::swap(u, v);
        return (static_cast<std::uint64_t>(u) << 32) | v;
    };
    std::unordered_set<std::uint64_t> present;
    present.reserve(m * 2);
    for (const auto &l : links)
        present.insert(key(l.source, l.target));

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first `count` entries are a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, m - 1);
        std::swap(order[i], order[pick(rng)]);
    }

    if (model == RewireModel::uniform) {
        if (n < 2)
            throw RewiringError("rewiring needs at least two nodes");
        for (std::size_t i = 0; i < count; ++i)
            present.erase(key(links[order[i]].source, links[order[i]].target));
        std::uniform_int_distribution<NodeId> node(0, n - 1);
        for (std::size_t i = 0; i < count; ++i) {
            auto &l = links[order[i]];
            std::size_t attempt = 0;
            for (;; ++attempt) {
                if (attempt == max_retries)
                    throw RewiringError("retry bound exhausted while rewiring");
                const NodeId u = node(rng), v = node(rng);
                if (u == v || present.contains(key(u, v)))
                    continue;
                l.source = u;
                l.target = v;
                present.insert(key(u, v));
                break;
            }
        }
    } else {
        if (m < 2)
            throw RewiringError("degree-preserving rewiring needs at least two links");
        std::uniform_int_distribution<std::size_t> other(0, m - 1);
        for (std::size_t i = 0; i < count; ++i) {
            auto &a = links[order[i]];
            std::size_t attempt = 0;
            for (;; ++attempt) {
                if (attempt == max_retries)
                    throw RewiringError("retry bound exhausted while rewiring");
                auto &b = links[other(rng)];
                if (&a == &b)
                    continue;
                NodeId bs = b.source, bt = b.target;
                if (!directed && (rng() & 1U))
                    std::swap(bs, bt);
                // a.source-a.target, bs-bt -> a.source-bt, bs-a.target
                if (a.source == bt || bs == a.target)
                    continue;
                const auto k1 = key(a.source, bt), k2 = key(bs, a.target);
                if (k1 == k2 || present.contains(k1) || present.contains(k2))
                    continue;
                present.erase(key(a.source, a.target));
                present.erase(key(b.source, b.target));
                present.insert(k1);
                present.insert(k2);
                const NodeId a_target = a.target;
                a.target = bt;
                b.source = bs;
                b.target = a_target;
                break;
            }
        }
    }
    return Graph::from_links(g.labels(), std::move(links), directed);
}

} // namespace mapcent
