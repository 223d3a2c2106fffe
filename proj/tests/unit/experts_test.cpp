#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include <gtest/gtest.h>

#include "camoe/errors.hpp"
#include "camoe/experts.hpp"
#include "camoe/scenario.hpp"
#include "helpers.hpp"

using namespace camoe;
using camoe::test::make_graph;

TEST(Features, EndpointsAreCollinear) {
  const auto g = generate_graph(20, 3.0, 1000.0, 1);
  const auto f = features_local(g, 2, 7, 2, 7);
  EXPECT_DOUBLE_EQ(f(0), g.distance(2, 7) / 1000.0);
  EXPECT_DOUBLE_EQ(f(1), 1.0);
  EXPECT_DOUBLE_EQ(f(2), 0.0);
  EXPECT_DOUBLE_EQ(f(3), 1.0);
}

TEST(Features, DirectSubstitution) {
  const auto g = make_graph({{0, 0}, {4, 0}, {2, 0}, {2, 3}}, 1000.0);
  const auto f = features_local(g, 0, 1, 2, 3);
  EXPECT_NEAR(f(0), 0.002, 1e-15);
  EXPECT_NEAR(f(1), 1.0, 1e-15);
  EXPECT_NEAR(f(2), std::sqrt(13.0) / 1000.0, 1e-15);
  EXPECT_NEAR(f(3), 2.0 * std::sqrt(13.0) / 4.0, 1e-12);
  EXPECT_NEAR(f(3), 1.8027756377319946, 1e-12);
}

TEST(Features, StretchAtLeastOneAndCoincidentEndpointsRejected) {
  const auto g = generate_graph(30, 2.0, 1000.0, 4);
  for (int o = 0; o < 30; ++o)
    for (int d = 0; d < 30; ++d) {
      if (o == d) continue;
      for (int x = 0; x < 30; ++x) ASSERT_GE(node_stretch(g, o, d, x), 1.0 - 1e-12);
    }
  EXPECT_THROW(features_local(g, 3, 3, 1, 2), InvalidArgument);
}

TEST(Features, LocalFeaturesIgnoreUnrelatedNodes) {
  auto g = generate_graph(12, 2.0, 1000.0, 2);
  auto coords = g.coords();
  const auto before = features_local(g, 0, 1, 2, 3);
  for (int v = 4; v < 12; ++v) coords.row(v) = coords.row(v).reverse();
  const EuclideanGraph moved(coords, g.radius(), g.density());
  EXPECT_EQ(features_local(moved, 0, 1, 2, 3), before);
}

TEST(Features, Spectral) {
  const auto tri = make_graph({{0, 0}, {1, 0}, {0.5, 0.8}}, 1.0);
  const auto r = resistance_oracle(tri);
  const auto f = features_spectral(r, 3, 0, 1, 2);
  EXPECT_NEAR(f(0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(f(1), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(features_spectral(r, 3, 0, 1, 0)(1), 0.0);
}

TEST(Features, SpectralInUnitIntervalOnConnectedGraphs) {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 20; ++seed) {
    const auto g = generate_graph(12, 3.0, 1000.0, seed);
    if (!PathOracle(g).distances().allFinite()) continue;
    ++checked;
    const auto r = resistance_oracle(g);
    for (int d = 0; d < 12; ++d)
      for (int v = 0; v < 12; ++v)
        for (int u : g.neighbors(v)) {
          const auto f = features_spectral(r, 12, d, v, u);
          ASSERT_GE(f.minCoeff(), 0.0);
          ASSERT_LE(f.maxCoeff(), 1.0);
        }
  }
}

TEST(Features, SpectralInfiniteAcrossComponents) {
  const auto g = make_graph({{0, 0}, {1, 0}, {10, 0}}, 1.0);
  EXPECT_TRUE(std::isinf(features_spectral(resistance_oracle(g), 3, 2, 0, 1)(0)));
}

TEST(Dataset, CompleteGraphHasNoHighStretchPairs) {
  const auto g = make_graph({{0, 0}, {100, 0}, {0, 100}, {100, 100}, {50, 50}}, 1000.0);
  const Scenario s(g);
  EXPECT_TRUE(build_expert_dataset(s.graph, s.paths, s.resistance, ExpertKind::GreedyLax,
                                   SamplerSpec::for_kind(ExpertKind::GreedyLax), 1)
                  .empty());
}

TEST(Dataset, ChainTargets) {
  // Side L = sqrt(3 / 3) = 1, so the pair (a, c) at distance 2 is outside the short band;
  // the Any band still exercises the forced-chain target.
  const auto g = make_graph({{0, 0}, {1, 0}, {2, 0}}, 1.0, 3.0);
  const Scenario s(g);
  SamplerSpec spec = SamplerSpec::for_kind(ExpertKind::GreedyTensile);
  spec.band = StretchBand::Any;
  const auto set = build_expert_dataset(s.graph, s.paths, s.resistance, ExpertKind::GreedyTensile, spec, 3);
  bool found = false;
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const auto& p = set.provenance[static_cast<std::size_t>(i)];
    if (p.destination == 2 && p.current == 0 && p.neighbor == 1) {
      EXPECT_DOUBLE_EQ(set.targets(i), -2.0 / g.radius());
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Dataset, TargetsMatchBruteForce) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scenario s(generate_graph(15, 2.0, 1000.0, seed));
    const auto ref = oracle::apsp(15, oracle::radius_edges(camoe::test::points(s.graph), 1000.0));
    for (ExpertKind kind : kAllExperts) {
      auto spec = SamplerSpec::for_kind(kind);
      spec.band = StretchBand::Any;
      const auto set = build_expert_dataset(s.graph, s.paths, s.resistance, kind, spec, seed);
      ASSERT_EQ(set.features.rows(), input_dim(kind));
      for (Eigen::Index i = 0; i < set.size(); ++i) {
        const auto& p = set.provenance[static_cast<std::size_t>(i)];
        ASSERT_TRUE(s.graph.adjacent(p.current, p.neighbor));
        const double q = -(s.graph.distance(p.current, p.neighbor) + ref[p.neighbor][p.destination]) / 1000.0;
        ASSERT_NEAR(set.targets(i), q, 1e-9);
        ASSERT_TRUE(set.features.col(i).allFinite());
      }
    }
  }
}

TEST(Dataset, BandsAreSoundAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scenario s(generate_graph(50, 2.0, 1000.0, seed));
    for (ExpertKind kind : kAllExperts) {
      const auto spec = SamplerSpec::for_kind(kind);
      const auto a = build_expert_dataset(s.graph, s.paths, s.resistance, kind, spec, 9);
      const auto b = build_expert_dataset(s.graph, s.paths, s.resistance, kind, spec, 9);
      EXPECT_EQ(a.features, b.features);
      EXPECT_EQ(a.targets, b.targets);
      for (const auto& p : a.provenance) {
        const double zeta = path_stretch(s.paths, s.graph, p.origin, p.destination);
        const double direct = s.graph.distance(p.origin, p.destination);
        if (spec.band == StretchBand::Low) {
          ASSERT_LE(zeta, 1.1);
          ASSERT_LE(direct, s.graph.side() / 3.0);
        } else {
          ASSERT_GE(zeta, 1.3);
          ASSERT_GE(direct, s.graph.side() / 2.0);
        }
      }
    }
  }
}

TEST(Dataset, DistanceBandCanBeDropped) {
  const Scenario s(generate_graph(50, 5.0, 1000.0, 3));
  auto banded = SamplerSpec::for_kind(ExpertKind::GreedyTensile);
  auto open = banded;
  open.distance_band = false;
  int extra = 0;
  for (const auto& [o, d] : connected_pairs(s.paths)) {
    const bool a = banded.matches(s.graph, s.paths, o, d), b = open.matches(s.graph, s.paths, o, d);
    ASSERT_TRUE(!a || b);
    if (b) ASSERT_LE(path_stretch(s.paths, s.graph, o, d), 1.1);
    extra += b && !a;
  }
  EXPECT_GT(extra, 0);
}

TEST(Dataset, StatesCoverShortestPathPlusEqualRandomCount) {
  const Scenario s(generate_graph(40, 4.0, 1000.0, 6));
  SplitMix64 rng(1);
  const auto [o, d] = connected_pairs(s.paths).back();
  const auto path = shortest_path_nodes(s.paths, o, d);
  const auto states = sample_states(s.graph, s.paths, o, d, rng);
  const std::size_t on_path = path.size() - 1;
  ASSERT_EQ(states.size(), 2 * on_path);
  for (std::size_t i = 0; i < on_path; ++i) EXPECT_EQ(states[i], path[i]);
  std::vector<int> sorted = states;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_EQ(std::find(states.begin(), states.end(), d), states.end());
}

TEST(Dataset, CsvHeader) {
  const Scenario s(generate_graph(20, 2.0, 1000.0, 2));
  auto spec = SamplerSpec::for_kind(ExpertKind::GreedySpectral);
  spec.band = StretchBand::Any;
  spec.max_pairs = 1;
  const auto set = build_expert_dataset(s.graph, s.paths, s.resistance, ExpertKind::GreedySpectral, spec, 1);
  std::ostringstream out;
  write_dataset_csv(out, set);
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "graph_id,O,D,v,u,f1,f2,target");
  EXPECT_EQ(static_cast<Eigen::Index>(std::count(text.begin(), text.end(), '\n')), set.size() + 1);
}

TEST(Select, SingleNeighborAndTies) {
  const auto chain = make_graph({{0, 0}, {1, 0}, {2, 0}}, 1.0);
  const auto r = resistance_oracle(chain);
  const Network m(4, {8, 4}, HeadMode::Regression, 1);
  EXPECT_EQ(score_and_select(m, ExpertKind::GreedyTensile, make_sample(chain, 0, 2, 0), chain, r).node, 1);

  const auto star = make_graph({{0, 0}, {1, 0}, {0, 1}, {-1, 0}}, 1.0);
  Network zero(4, {8, 4}, HeadMode::Regression, 1);
  zero.set_zero();
  const auto sel =
      score_and_select(zero, ExpertKind::GreedyTensile, make_sample(star, 2, 3, 0), star, resistance_oracle(star));
  EXPECT_EQ(sel.node, 1);
  EXPECT_EQ(sel.scores, (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Select, NoFeasibleNeighbor) {
  // D sits in another component, so every resistance feature is infinite.
  const auto g = make_graph({{0, 0}, {1, 0}, {10, 0}}, 1.0);
  const Network m(2, {4, 2}, HeadMode::Regression, 1);
  EXPECT_THROW(score_and_select(m, ExpertKind::GreedySpectral, make_sample(g, 0, 2, 0), g, resistance_oracle(g)),
               NoCandidateError);
}

TEST(Select, TrainedExpertMemorizesSmallGraph) {
  const Scenario s(make_graph({{0, 0}, {900, 100}, {1500, 800}, {700, 1300}, {2100, 200}, {2300, 1200}}, 1000.0, 1.0));
  auto spec = SamplerSpec::for_kind(ExpertKind::GreedyTensile);
  spec.band = StretchBand::Any;
  spec.max_pairs = -1;
  const auto set = build_expert_dataset(s.graph, s.paths, s.resistance, ExpertKind::GreedyTensile, spec, 1);
  const auto m = train(Network(4, Network::default_hidden(4), HeadMode::Regression, 2), set.features, set.targets,
                       {1e-3, 30000, 32, 3, Optimizer::Adam});
  std::set<std::tuple<int, int, int>> states;
  for (const auto& p : set.provenance) states.insert({p.origin, p.destination, p.current});
  int hits = 0, total = 0;
  for (const auto& [o, d, v] : states) {
    const auto sample = make_sample(s.graph, o, d, v);
    const int chosen = score_and_select(m, ExpertKind::GreedyTensile, sample, s.graph, s.resistance).node;
    double best = -kInfinity;
    for (int u : sample.neighbors) best = std::max(best, optimal_q(s.paths, s.graph, d, v, u));
    hits += optimal_q(s.paths, s.graph, d, v, chosen) == best;
    ++total;
  }
  EXPECT_GE(static_cast<double>(hits) / total, 0.9);
}
