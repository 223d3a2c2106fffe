#include <gtest/gtest.h>

#include "camoe/pipeline.hpp"

using namespace camoe;

namespace {

PretrainConfig small_config() {
  PretrainConfig cfg;
  cfg.seed_graphs = 2;
  cfg.n = 20;
  cfg.expert_train.iterations = 40;
  cfg.gating_train.iterations = 40;
  cfg.gating_pairs = 6;
  return cfg;
}

bool same(const ModelSet& a, const ModelSet& b) {
  return a.tensile == b.tensile && a.lax == b.lax && a.spectral == b.spectral && a.router == b.router &&
         a.deferral == b.deferral;
}

}  // namespace

TEST(Pretrain, SeedScenariosAreSeeded) {
  const auto cfg = small_config();
  const auto a = seed_scenarios(cfg, 5.0, 1000);
  const auto b = seed_scenarios(cfg, 5.0, 1000);
  const auto c = seed_scenarios(cfg, 5.0, 2000);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].graph.coords(), b[0].graph.coords());
  EXPECT_NE(a[0].graph.coords(), c[0].graph.coords());
  EXPECT_NE(a[0].graph.coords(), a[1].graph.coords());
}

TEST(Pretrain, ZeroIterationsKeepsInitialization) {
  auto cfg = small_config();
  cfg.expert_train.iterations = 0;
  cfg.gating_train.iterations = 0;
  const auto dense = seed_scenarios(cfg, 5.0, 1000);
  const auto sparse = seed_scenarios(cfg, 2.0, 2000);
  EXPECT_TRUE(same(pretrain(cfg, dense, sparse), ModelSet::initial(cfg.seed, cfg.deferral)));
}

TEST(Pretrain, DeterministicAndLogged) {
  const auto cfg = small_config();
  const auto dense = seed_scenarios(cfg, 5.0, 1000);
  const auto sparse = seed_scenarios(cfg, 2.0, 2000);
  PretrainLog log;
  const auto a = pretrain(cfg, dense, sparse, &log);
  EXPECT_TRUE(same(a, pretrain(cfg, dense, sparse)));
  EXPECT_GT(log.components[0].rows, 0u);
  EXPECT_GT(log.components[4].rows, 0u);
  EXPECT_LT(log.components[0].loss_after, log.components[0].loss_before);
  EXPECT_TRUE(a.tensile.normalized());
}

TEST(Pretrain, DeferralRoundsAddRolloutStates) {
  auto cfg = small_config();
  const auto dense = seed_scenarios(cfg, 5.0, 1000);
  const auto sparse = seed_scenarios(cfg, 2.0, 2000);
  PretrainLog base, extra;
  pretrain(cfg, dense, sparse, &base);
  cfg.deferral_rounds = 1;
  const auto m = pretrain(cfg, dense, sparse, &extra);
  EXPECT_GT(extra.components[4].rows, base.components[4].rows);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(extra.components[k].rows, base.components[k].rows);
}
