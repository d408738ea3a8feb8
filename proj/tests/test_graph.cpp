#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <tuple>

#include <mapcent/graph.hpp>

#include "fixtures.hpp"

using namespace mapcent;

TEST(GraphParse, MinimalUndirected) {
    const auto g = parse_edge_list("1 2\n2 3\n", false);
    EXPECT_EQ(g.num_nodes(), 3u);
    EXPECT_EQ(g.num_links(), 2u);
    for (const auto &l : g.links())
        EXPECT_EQ(l.weight, 1.0);
    EXPECT_EQ(g.degree(1), 2u);
}

TEST(GraphParse, Toy8Degrees) {
    const auto g = test::toy8();
    ASSERT_EQ(g.num_nodes(), 8u);
    EXPECT_EQ(g.num_links(), 10u);
    const std::vector<std::size_t> expected{3, 2, 2, 4, 4, 2, 2, 1};
    for (NodeId u = 0; u < 8; ++u) {
        EXPECT_EQ(g.degree(u), expected[u]) << "node " << g.label(u);
        EXPECT_EQ(g.label(u), std::to_string(u + 1));
    }
}

TEST(GraphParse, ParallelLinksMerge) {
    const auto g = parse_edge_list("a b 2.5\na b 1.5\n", true);
    ASSERT_EQ(g.num_links(), 1u);
    EXPECT_DOUBLE_EQ(g.links()[0].weight, 4.0);
    EXPECT_EQ(g.label(g.links()[0].source), "a");

    // Undirected: reversed duplicates merge too.
    const auto u = parse_edge_list("a b\nb a\n", false);
    ASSERT_EQ(u.num_links(), 1u);
    EXPECT_DOUBLE_EQ(u.links()[0].weight, 2.0);
}

TEST(GraphParse, CommentsBlankLinesAndSelfLoops) {
    const auto g = parse_edge_list("# header\n\n  x y\nx x 3\n# trailing\n", false);
    EXPECT_EQ(g.num_nodes(), 2u);
    EXPECT_EQ(g.num_links(), 1u);
    EXPECT_EQ(g.self_loops_dropped(), 1u);
}

TEST(GraphParse, Errors) {
    try {
        parse_edge_list("1 2\n1 2 3 4\n", false);
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_edge_list("1\n", false), ParseError);
    EXPECT_THROW(parse_edge_list("1 2 abc\n", false), ParseError);
    EXPECT_THROW(parse_edge_list("1 2 0\n", false), ValidationError);
    EXPECT_THROW(parse_edge_list("1 2 -1.5\n", false), ValidationError);
}

TEST(GraphParse, DirectedAdjacency) {
    const auto g = parse_edge_list("a b\nb c\nc a\na c 2\n", true);
    const auto a = *g.find("a"), c = *g.find("c");
    EXPECT_EQ(g.out_neighbors(a).size(), 2u);
    EXPECT_EQ(g.in_neighbors(a).size(), 1u);
    EXPECT_DOUBLE_EQ(g.out_strength(a), 3.0);
    EXPECT_DOUBLE_EQ(g.in_strength(c), 3.0);
    EXPECT_EQ(g.degree(a), 3u);
    EXPECT_TRUE(g.has_link(a, c));
    EXPECT_TRUE(g.has_link(c, a));
    EXPECT_FALSE(g.has_link(*g.find("b"), a));
}

TEST(GraphParse, SerializeRoundTripIsIdempotent) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const bool directed = trial % 2 == 1;
        const auto g = test::random_graph(rng, 15, 0.3, directed, true);
        std::ostringstream first;
        write_edge_list(first, g);
        const auto h = parse_edge_list(first.str(), directed);
        std::ostringstream second;
        write_edge_list(second, h);
        const auto k = parse_edge_list(second.str(), directed);
        std::ostringstream third;
        write_edge_list(third, k);
        EXPECT_EQ(first.str(), second.str());
        EXPECT_EQ(second.str(), third.str());

        // Same links by label, whatever ids the reparse assigned.
        auto keyed = [](const Graph &x) {
            std::set<std::tuple<std::string, std::string, double>> out;
            for (const auto &l : x.links()) {
                auto a = x.label(l.source), b = x.label(l.target);
                if (!x.directed() && b < a)
                    std::swap(a, b);
                out.emplace(a, b, l.weight);
            }
            return out;
        };
        EXPECT_EQ(keyed(g), keyed(h));
    }
}

TEST(GraphProperties, StrengthSumIsTwiceTotalWeight) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = test::random_graph(rng, 20, 0.2, false, true);
        double sum = 0.0;
        for (NodeId u = 0; u < g.num_nodes(); ++u)
            sum += g.strength(u);
        EXPECT_NEAR(sum, 2.0 * g.total_weight(), 1e-9);
    }
}

TEST(EpidemicThreshold, RegularCycle) {
    const auto g = parse_edge_list("a b\nb c\nc d\nd a\n", false);
    EXPECT_DOUBLE_EQ(epidemic_threshold(g), 1.0);
    const auto s = degree_stats(g);
    EXPECT_DOUBLE_EQ(s.mean_degree, 2.0);
    EXPECT_DOUBLE_EQ(s.mean_square_degree, 4.0);
}

TEST(EpidemicThreshold, Toy8) {
    const auto g = test::toy8();
    const auto s = degree_stats(g);
    EXPECT_DOUBLE_EQ(s.mean_degree, 2.5);
    EXPECT_DOUBLE_EQ(s.mean_square_degree, 7.25);
    EXPECT_NEAR(epidemic_threshold(g), 2.5 / 4.75, 1e-15);
    EXPECT_GE(s.mean_square_degree, s.mean_degree * s.mean_degree);
}

TEST(EpidemicThreshold, PerfectMatchingIsUndefined) {
    const auto g = parse_edge_list("a b\nc d\n", false);
    EXPECT_THROW(epidemic_threshold(g), ComputationError);
    EXPECT_THROW(epidemic_threshold(Graph::from_links(3, {}, false)), ValidationError);
}

namespace {
void expect_simple(const Graph &g) {
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto &l : g.links()) {
        EXPECT_NE(l.source, l.target);
        EXPECT_TRUE(seen.insert({l.source, l.target}).second);
    }
    EXPECT_EQ(g.self_loops_dropped(), 0u);
}
} // namespace

TEST(Rewire, ZeroFractionIsIdentity) {
    const auto g = test::toy8();
    const auto h = rewire(g, 0.0, 42);
    EXPECT_EQ(h.links(), g.links());
}

TEST(Rewire, FullRewireKeepsCountsAndSimplicity) {
    const auto g = test::toy8();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto h = rewire(g, 1.0, seed);
        EXPECT_EQ(h.num_nodes(), 8u);
        EXPECT_EQ(h.num_links(), 10u);
        expect_simple(h);
    }
}

TEST(Rewire, DegreePreservingKeepsDegrees) {
    // TOY8 is too small: some states leave a link with no legal swap.
    std::mt19937_64 rng(12);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = test::random_connected_graph(rng, 40, 0.1);
        const auto h = rewire(g, 1.0, seed, RewireModel::degree_preserving);
        EXPECT_EQ(h.num_links(), g.num_links());
        expect_simple(h);
        for (NodeId u = 0; u < 40; ++u)
            EXPECT_EQ(h.degree(u), g.degree(u));
    }
}

TEST(Rewire, Deterministic) {
    const auto g = test::toy8();
    EXPECT_EQ(rewire(g, 0.5, 9).links(), rewire(g, 0.5, 9).links());
    std::mt19937_64 rng(3);
    const auto d = test::random_graph(rng, 30, 0.1, true);
    EXPECT_EQ(rewire(d, 0.7, 1).links(), rewire(d, 0.7, 1).links());
}

TEST(Rewire, PreservesNodeAndLinkCountForAnyFraction) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = test::random_graph(rng, 25, 0.15, trial % 3 == 0);
        const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const auto h = rewire(g, r, static_cast<std::uint64_t>(trial));
        EXPECT_EQ(h.num_nodes(), g.num_nodes());
        EXPECT_EQ(h.num_links(), g.num_links());
        expect_simple(h);
    }
}

TEST(Rewire, CompleteGraphExhaustsRetries) {
    const auto k4 = parse_edge_list("a b\na c\na d\nb c\nb d\nc d\n", false);
    // Every swap on a complete graph would duplicate a link.
    EXPECT_THROW(rewire(k4, 0.5, 1, RewireModel::degree_preserving), RewiringError);
    EXPECT_NO_THROW(rewire(k4, 1.0, 1, RewireModel::uniform));
    EXPECT_THROW(rewire(k4, 1.5, 1), ValidationError);
}
