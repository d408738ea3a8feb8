#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace mapcent {

using ModuleId = std::uint32_t;

/**
 * Assignment of nodes to possibly nested modules.
 *
 * Every node has a path of module ids from the root; a path of length one is
 * a plain two-level assignment. Modules form a tree rooted at index 0 (the
 * whole network). Leaf modules hold nodes and are never empty.
 */
class Partition {
public:
    struct Module {
        ModuleId parent = 0;
        std::uint32_t segment = 0;      ///< id within the parent, as written in files
        std::vector<ModuleId> children; ///< submodules (internal modules only)
        std::vector<NodeId> members;    ///< nodes (leaf modules only)

        bool is_leaf() const noexcept { return children.empty(); }
    };

    static constexpr ModuleId root = 0;

    Partition() = default;

    /// Builds from one path per node. Throws ValidationError when a path is
    /// empty or a module would hold both nodes and submodules.
    static Partition from_paths(const std::vector<std::vector<std::uint32_t>> &paths) {
        Partition p;
        p.modules_.emplace_back();
        std::map<std::pair<ModuleId, std::uint32_t>, ModuleId> child_index;
        p.leaf_of_.resize(paths.size());
        for (NodeId u = 0; u < paths.size(); ++u) {
            const auto &path = paths[u];
            if (path.empty())
                throw ValidationError("empty module path for node " + std::to_string(u));
            ModuleId cur = root;
            for (auto seg : path) {
                auto [it, inserted] = child_index.try_emplace({cur, seg}, static_cast<ModuleId>(p.modules_.size()));
                if (inserted) {
                    if (!p.modules_[cur].members.empty())
                        throw ValidationError("module holds both nodes and submodules");
                    Module m;
                    m.parent = cur;
                    m.segment = seg;
                    p.modules_.push_back(std::move(m));
                    p.modules_[cur].children.push_back(it->second);
                }
                cur = it->second;
            }
            if (!p.modules_[cur].children.empty())
                throw ValidationError("module holds both nodes and submodules");
            p.modules_[cur].members.push_back(u);
            p.leaf_of_[u] = cur;
        }
        p.index_leaves();
        return p;
    }

    /// Two-level partition from one module label per node.
    static Partition from_labels(std::span<const std::uint32_t> labels) {
        std::vector<std::vector<std::uint32_t>> paths(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            paths[i] = {labels[i]};
        return from_paths(paths);
    }

    static Partition one_level(std::size_t n) {
        std::vector<std::uint32_t> labels(n, 1);
        return from_labels(labels);
    }

    static Partition singletons(std::size_t n) {
        std::vector<std::uint32_t> labels(n);
        for (std::size_t i = 0; i < n; ++i)
            labels[i] = static_cast<std::uint32_t>(i + 1);
        return from_labels(labels);
    }

    std::size_t num_nodes() const noexcept { return leaf_of_.size(); }
    std::size_t num_modules() const noexcept { return modules_.empty() ? 0 : modules_.size() - 1; }
    std::size_t num_leaf_modules() const noexcept { return leaves_.size(); }

    const Module &module(ModuleId m) const { return modules_[m]; }
    const std::vector<Module> &modules() const noexcept { return modules_; }

    /// Leaf modules in order of first appearance.
    const std::vector<ModuleId> &leaves() const noexcept { return leaves_; }
    ModuleId leaf_of(NodeId u) const { return leaf_of_[u]; }

    /// Dense leaf index in [0, num_leaf_modules()) per node.
    std::vector<std::uint32_t> leaf_labels() const {
        std::vector<std::uint32_t> out(num_nodes());
        for (NodeId u = 0; u < out.size(); ++u)
            out[u] = leaf_rank_[leaf_of_[u]];
        return out;
    }

    bool is_two_level() const noexcept {
        return std::all_of(leaves_.begin(), leaves_.end(),
                           [&](ModuleId m) { return modules_[m].parent == root; });
    }

    std::vector<std::uint32_t> path(NodeId u) const {
        std::vector<std::uint32_t> out;
        for (ModuleId m = leaf_of_[u]; m != root; m = modules_[m].parent)
            out.push_back(modules_[m].segment);
        std::reverse(out.begin(), out.end());
        return out;
    }

    /// Same leaf grouping, regardless of module ids.
    bool same_grouping(const Partition &other) const {
        if (num_nodes() != other.num_nodes() || num_leaf_modules() != other.num_leaf_modules())
            return false;
        std::vector<std::int64_t> map(num_leaf_modules(), -1);
        const auto a = leaf_labels(), b = other.leaf_labels();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (map[a[i]] < 0)
                map[a[i]] = b[i];
            else if (map[a[i]] != b[i])
                return false;
        }
        return true;
    }

private:
    void index_leaves() {
        leaves_.clear();
        leaf_rank_.assign(modules_.size(), 0);
        std::vector<bool> seen(modules_.size(), false);
        for (auto m : leaf_of_)
            if (!seen[m]) {
                seen[m] = true;
                leaf_rank_[m] = static_cast<std::uint32_t>(leaves_.size());
                leaves_.push_back(m);
            }
    }

    std::vector<Module> modules_;
    std::vector<ModuleId> leaf_of_;
    std::vector<ModuleId> leaves_;
    std::vector<std::uint32_t> leaf_rank_;
};

/// Reads "label module-path" lines (path segments separated by ':'). Every
/// graph node must appear exactly once.
inline Partition parse_partition(std::istream &in, const Graph &g) {
    std::vector<std::vector<std::uint32_t>> paths(g.num_nodes());
    std::vector<bool> seen(g.num_nodes(), false);
    std::string line;
    std::size_t lineno = 0, assigned = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#')
            continue;
        if (tokens.size() != 2)
            throw ParseError("expected 'label module-path'", lineno);
        const auto id = g.find(tokens[0]);
        if (!id)
            throw ValidationError("line " + std::to_string(lineno) + ": node '" +
                                  std::string(tokens[0]) + "' is not in the graph");
        if (seen[*id])
            throw ValidationError("line " + std::to_string(lineno) + ": node '" +
                                  std::string(tokens[0]) + "' assigned twice");
        std::vector<std::uint32_t> path;
        std::string_view rest = tokens[1];
        while (true) {
            const auto colon = rest.find(':');
            const auto seg = rest.substr(0, colon);
            std::uint32_t v = 0;
            auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), v);
            if (seg.empty() || ec != std::errc() || ptr != seg.data() + seg.size())
                throw ParseError("bad module path '" + std::string(tokens[1]) + "'", lineno);
            path.push_back(v);
            if (colon == std::string_view::npos)
                break;
            rest.remove_prefix(colon + 1);
        }
        paths[*id] = std::move(path);
        seen[*id] = true;
        ++assigned;
    }
    if (assigned != g.num_nodes()) {
        const auto missing = std::find(seen.begin(), seen.end(), false) - seen.begin();
        throw ValidationError("node '" + g.label(static_cast<NodeId>(missing)) + "' has no module");
    }
    return Partition::from_paths(paths);
}

inline void write_partition(std::ostream &out, const Graph &g, const Partition &p) {
    for (NodeId u = 0; u < p.num_nodes(); ++u) {
        out << g.label(u) << ' ';
        const auto path = p.path(u);
        for (std::size_t i = 0; i < path.size(); ++i)
            out << (i ? ":" : "") << path[i];
        out << '\n';
    }
}

} // namespace mapcent
