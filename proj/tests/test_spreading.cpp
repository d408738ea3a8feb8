#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <mapcent/spreading.hpp>

#include "fixtures.hpp"

using namespace mapcent;

namespace {

Graph star(int leaves) {
    std::vector<Link> links;
    for (int i = 1; i <= leaves; ++i)
        links.push_back({0, static_cast<NodeId>(i), 1.0});
    return Graph::from_links(static_cast<NodeId>(leaves + 1), std::move(links), false);
}

SirConfig sir(double p, std::size_t reps, std::uint64_t seed = 1) {
    SirConfig cfg;
    cfg.infection_probability = p;
    cfg.repetitions = reps;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST(LinearThreshold, Toy8HandSimulation) {
    const auto g = test::toy8();
    const std::vector<NodeId> seeds{3, 4}; // nodes 4 and 5
    const auto half = linear_threshold(g, seeds, 0.5);
    EXPECT_DOUBLE_EQ(half.value, 1.0);
    EXPECT_EQ(half.steps, 2u);

    // Node 2 sees 1 of 2 neighbours active; only node 8 joins.
    const auto strict = linear_threshold(g, seeds, 0.6);
    EXPECT_DOUBLE_EQ(strict.value, 0.375);
}

TEST(LinearThreshold, TrivialSeedSets) {
    const auto g = test::toy8();
    EXPECT_EQ(linear_threshold(g, std::vector<NodeId>{}, 0.3).value, 0.0);
    const std::vector<NodeId> all{0, 1, 2, 3, 4, 5, 6, 7};
    EXPECT_EQ(linear_threshold(g, all, 1.0).value, 1.0);
    EXPECT_THROW(linear_threshold(g, all, 0.0), ValidationError);
    EXPECT_THROW(linear_threshold(g, std::vector<NodeId>{9}, 0.5), ValidationError);
}

TEST(LinearThreshold, IsolatedNodesNeverActivate) {
    const auto g = Graph::from_links(3, {{0, 1, 1.0}}, false);
    EXPECT_NEAR(linear_threshold(g, std::vector<NodeId>{0}, 0.1).value, 2.0 / 3.0, 1e-15);
}

TEST(LinearThreshold, DirectedUsesChosenNeighbours) {
    // a -> b: b is influenced by its in-neighbour a.
    const auto g = parse_edge_list("a b\n", true);
    EXPECT_EQ(linear_threshold(g, std::vector<NodeId>{0}, 1.0).value, 1.0);
    EXPECT_EQ(linear_threshold(g, std::vector<NodeId>{1}, 1.0).value, 0.5);
    EXPECT_EQ(linear_threshold(g, std::vector<NodeId>{1}, 1.0, LtDirection::out_neighbors).value, 1.0);
}

TEST(LinearThreshold, MonotoneInSeedsAndBoundedRounds) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = test::random_graph(rng, 40, 0.08, trial % 2 == 1);
        const double t = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
        std::vector<NodeId> seeds;
        double last = 0.0;
        for (NodeId u = 0; u < 40; u += 3) {
            seeds.push_back(static_cast<NodeId>(rng() % 40));
            const auto out = linear_threshold(g, seeds, t);
            EXPECT_GE(out.value, last);
            EXPECT_LE(out.steps, 40u);
            last = out.value;
        }
    }
}

TEST(Sir, TrivialProbabilities) {
    const auto g = test::toy8();
    for (NodeId u = 0; u < 8; ++u) {
        EXPECT_EQ(sir_spreading_power(g, u, sir(0.0, 50)), 1.0);
        EXPECT_EQ(sir_spreading_power(g, u, sir(1.0, 20)), 8.0);
    }
    // Clamped rather than rejected.
    EXPECT_EQ(sir_spreading_power(g, 0, sir(1.7, 5)), 8.0);
    EXPECT_THROW(sir_spreading_power(g, 0, sir(0.5, 0)), ValidationError);
}

TEST(Sir, StarCentreMatchesBinomialMean) {
    for (int k : {4, 10})
        for (double p : {0.3, 0.5}) {
            const auto out = sir_simulate(star(k), 0, sir(p, 10000, 5));
            const double expected = 1.0 + k * p;
            const double se = std::sqrt(k * p * (1.0 - p) / 10000.0);
            EXPECT_NEAR(out.value, expected, 3.0 * se) << "k=" << k << " p=" << p;
            for (auto c : out.counts)
                EXPECT_LE(c, static_cast<std::size_t>(k + 1));
        }
}

TEST(Sir, MonotoneInProbability) {
    const auto g = test::toy8();
    for (NodeId u = 0; u < 8; ++u) {
        const double low = sir_spreading_power(g, u, sir(0.1, 10000));
        const double mid = sir_spreading_power(g, u, sir(0.5, 10000));
        const double high = sir_spreading_power(g, u, sir(0.9, 10000));
        EXPECT_LT(low, mid);
        EXPECT_LT(mid, high);
    }
}

TEST(Sir, IdenticalAcrossThreadCounts) {
    std::mt19937_64 rng(51);
    const auto g = test::random_graph(rng, 60, 0.06);
    auto cfg = sir(0.3, 200, 99);
    cfg.threads = 1;
    const auto one = sir_spreading_powers(g, cfg);
    cfg.threads = 4;
    EXPECT_EQ(one, sir_spreading_powers(g, cfg));
    EXPECT_EQ(one, sir_spreading_powers(g, cfg));
    for (double p : one) {
        EXPECT_GE(p, 1.0);
        EXPECT_LE(p, 60.0);
    }
}

TEST(Imprecision, Examples) {
    const std::vector<double> power{1.0, 2.0, 3.0, 4.0};
    const std::vector<NodeId> best{3, 2, 1, 0}, worst{0, 1, 2, 3};
    for (double x : {0.25, 0.5, 1.0})
        EXPECT_EQ(imprecision(best, power, x), 0.0);
    EXPECT_DOUBLE_EQ(imprecision(worst, power, 0.25), 0.75);
    const std::vector<double> flat{2.0, 2.0, 2.0, 2.0};
    EXPECT_EQ(imprecision(worst, flat, 0.5), 0.0);
    EXPECT_THROW(imprecision(best, power, 0.0), ValidationError);
}

TEST(Imprecision, TopCountRoundsUp) {
    EXPECT_EQ(top_count(0.01, 100), 1u);
    EXPECT_EQ(top_count(0.011, 100), 2u);
    EXPECT_EQ(top_count(0.1, 8), 1u);
    EXPECT_EQ(top_count(0.0, 8), 0u);
    EXPECT_EQ(top_count(1.0, 8), 8u);
    EXPECT_THROW(top_count(1.5, 8), ValidationError);
}

TEST(SelectionPerplexity, Examples) {
    EXPECT_DOUBLE_EQ(selection_perplexity(test::toy8_opt(), std::vector<NodeId>{0, 1, 2}), 1.0);
    const auto four = test::partition_of({1, 1, 2, 2, 3, 3, 4, 4});
    EXPECT_DOUBLE_EQ(selection_perplexity(four, std::vector<NodeId>{0, 1, 2, 3, 4, 5, 6, 7}), 4.0);
    EXPECT_NEAR(selection_perplexity(test::toy8_opt(), std::vector<NodeId>{0, 1, 2, 4}), 1.7548, 5e-5);
    EXPECT_THROW(selection_perplexity(four, std::vector<NodeId>{}), ValidationError);
}
