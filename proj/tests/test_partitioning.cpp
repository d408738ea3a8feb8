#include <gtest/gtest.h>

#include <random>

#include <mapcent/partitioning.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace mapcent;

namespace {

Graph two_cliques() {
    return parse_edge_list("a b\na c\na d\nb c\nb d\nc d\n"
                           "e f\ne g\ne h\nf g\nf h\ng h\n"
                           "d e\n",
                           false);
}

SearchConfig runs(std::size_t k, std::uint64_t seed = 1) {
    SearchConfig cfg;
    cfg.num_runs = k;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST(Optimizer, Toy8RecoversTwoModules) {
    const auto f = visit_rates_undirected(test::toy8());
    const auto res = optimize_two_level(f, runs(10));
    EXPECT_TRUE(res.partition.same_grouping(test::toy8_opt()));
    EXPECT_NEAR(res.codelength, 2.4741971727682, 1e-12);
    EXPECT_NEAR(res.codelength, codelength(f, res.partition), 1e-12);
}

TEST(Optimizer, CliqueStaysWhole) {
    const auto k5 = parse_edge_list("a b\na c\na d\na e\nb c\nb d\nb e\nc d\nc e\nd e\n", false);
    const auto f = visit_rates_undirected(k5);
    const auto res = optimize_two_level(f, runs(10));
    EXPECT_EQ(res.partition.num_leaf_modules(), 1u);
    EXPECT_NEAR(res.codelength, codelength_one_level(f), 1e-12);
    EXPECT_NEAR(oracle::exhaustive_min_codelength(f), codelength_one_level(f), 1e-12);
}

TEST(Optimizer, TwoCliquesSplit) {
    const auto g = two_cliques();
    const auto f = visit_rates_undirected(g);
    const auto res = optimize_two_level(f, runs(10));
    EXPECT_TRUE(res.partition.same_grouping(test::toy8_opt()));
    std::vector<std::uint32_t> best;
    EXPECT_NEAR(oracle::exhaustive_min_codelength(f, &best), res.codelength, 1e-12);
    EXPECT_TRUE(Partition::from_labels(best).same_grouping(res.partition));
}

TEST(Optimizer, EnumeratorBoundsKnownPartitions) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = visit_rates_undirected(test::random_connected_graph(rng, 7, 0.3));
        const double best = oracle::exhaustive_min_codelength(f);
        EXPECT_LE(best, codelength_one_level(f) + 1e-12);
        EXPECT_LE(best, codelength(f, Partition::singletons(7)) + 1e-12);
        EXPECT_LE(best, codelength(f, test::random_partition(rng, 7, 3)) + 1e-12);
    }
}

TEST(Optimizer, MatchesExhaustiveOptimumOnSmallGraphs) {
    std::mt19937_64 rng(2024);
    int matched = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<NodeId>(std::uniform_int_distribution<int>(3, 8)(rng));
        const auto g = test::random_graph(rng, n, 0.4, false, trial % 2 == 1);
        const auto f = visit_rates_undirected(g);
        const auto res = optimize_two_level(f, runs(20, static_cast<std::uint64_t>(trial)));
        const double best = oracle::exhaustive_min_codelength(f);
        EXPECT_GE(res.codelength, best - 1e-9);
        if (std::abs(res.codelength - best) <= 1e-9)
            ++matched;
    }
    EXPECT_GE(matched, 95);
}

TEST(Optimizer, NeverWorseThanOneLevelAndDeterministic) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const bool directed = trial % 2 == 0;
        const auto g = test::random_graph(rng, 60, 0.05, directed, true);
        const auto f = compute_flow(g, directed ? FlowModel::node_teleport : FlowModel::raw_undirected, 0.15);
        auto cfg = runs(5, 77);
        const auto a = optimize_two_level(f, cfg);
        EXPECT_LE(a.codelength, codelength_one_level(f) + 1e-12);
        EXPECT_NEAR(a.codelength, codelength(f, a.partition), 1e-10);
        cfg.threads = 3;
        const auto b = optimize_two_level(f, cfg);
        EXPECT_EQ(a.partition.leaf_labels(), b.partition.leaf_labels());
        EXPECT_EQ(a.codelength, b.codelength);
        EXPECT_EQ(a.best_run, b.best_run);
    }
}

TEST(Optimizer, ZeroRateNodesStayAlone) {
    // c has no in-links and no teleportation lands anywhere without tau.
    const auto g = parse_edge_list("a b\nb a\nc a\n", true);
    const auto f = visit_rates_node_teleport(g, 0.0);
    ASSERT_NEAR(f.visit_rate[2], 0.0, 1e-12);
    const auto res = optimize_two_level(f, runs(3));
    const auto &m = res.partition;
    EXPECT_EQ(m.module(m.leaf_of(2)).members.size(), 1u);
}

TEST(Optimizer, RejectsBadConfig) {
    const auto f = visit_rates_undirected(test::toy8());
    EXPECT_THROW(optimize_two_level(f, runs(0)), ValidationError);
    auto cfg = runs(1);
    cfg.min_gain = -1.0;
    EXPECT_THROW(optimize_two_level(f, cfg), ValidationError);
}

TEST(PartitionStats, EffectiveModules) {
    EXPECT_DOUBLE_EQ(effective_num_modules(test::toy8_opt()), 2.0);
    EXPECT_NEAR(effective_num_modules(test::toy8_sub()), 1.938, 5e-4);
    EXPECT_DOUBLE_EQ(effective_num_modules(test::toy8_one()), 1.0);
}

TEST(PartitionStats, Mixing) {
    const auto g = test::toy8();
    EXPECT_DOUBLE_EQ(mixing(g, test::toy8_opt()), 0.1);
    EXPECT_DOUBLE_EQ(mixing(g, test::toy8_one()), 0.0);
    EXPECT_DOUBLE_EQ(mixing(g, Partition::singletons(8)), 1.0);
    EXPECT_THROW(mixing(Graph::from_links(2, {}, false), Partition::one_level(2)), ValidationError);
}

TEST(PartitionStats, Modularity) {
    const auto g = test::toy8();
    // Module degree sums are 11 and 9.
    EXPECT_NEAR(modularity(g, test::toy8_opt()), 0.9 - (0.55 * 0.55 + 0.45 * 0.45), 1e-15);
    EXPECT_NEAR(modularity(g, test::toy8_opt()), 0.395, 1e-12);
    EXPECT_NEAR(modularity(g, test::toy8_one()), 0.0, 1e-15);
    const auto tri = parse_edge_list("a b\nb c\nc a\n", false);
    EXPECT_NEAR(modularity(tri, Partition::singletons(3)), -1.0 / 3.0, 1e-15);

    // Directed: a 2-cycle in one module has Q = 1 - (2 * 2) / 4 = 0.
    const auto cyc = parse_edge_list("a b\nb a\n", true);
    EXPECT_NEAR(modularity(cyc, Partition::one_level(2)), 0.0, 1e-15);
    EXPECT_NEAR(modularity(cyc, Partition::singletons(2)), -0.5, 1e-15);
}
