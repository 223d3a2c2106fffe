#include <sstream>

#include <gtest/gtest.h>

#include "camoe/config.hpp"
#include "camoe/errors.hpp"

using namespace camoe;

TEST(RunConfig, DefaultsAreReferenceSettings) {
  const RunConfig c;
  EXPECT_EQ(c.n_train, 50);
  EXPECT_EQ(c.seed_graphs, 10);
  EXPECT_EQ(c.rho_gt, 5.0);
  EXPECT_EQ(c.rho_sparse, 2.0);
  EXPECT_EQ(c.radius, 1000.0);
  EXPECT_EQ(c.hidden_layers, 2);
  EXPECT_EQ(c.epsilon, 0.05);
  EXPECT_EQ(c.phi, 10);
  EXPECT_EQ(c.iter_ft, 1000);
  EXPECT_EQ(c.iter_router, 1000);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.minibatch, 32);
  EXPECT_EQ(c.ed_capacity, 200u);
  EXPECT_EQ(c.hop_limit_factor, 2.0);
  EXPECT_EQ(c.suite_graphs, 20);
  EXPECT_EQ(c.suite_n, 50);
  EXPECT_EQ(c.delta, 0.05);
  EXPECT_EQ(c.accept_threshold, 0.8);
  EXPECT_EQ(c.deferral_rounds, 1);
}

TEST(RunConfig, ConversionsCarryValues) {
  RunConfig c;
  c.set("phi", "7");
  c.set("iter_ft", "12");
  c.set("delta", "0.25");
  c.set("epsilon", "0.1");
  const auto m = c.meta();
  EXPECT_EQ(m.phi, 7);
  EXPECT_EQ(m.finetune.iterations, 12);
  EXPECT_EQ(m.deferral.delta, 0.25);
  EXPECT_EQ(c.eval().epsilon, 0.1);
  EXPECT_EQ(c.pretrain().seed_graphs, 10);
  EXPECT_EQ(c.suite(SuiteKind::Dense, true).random_init, true);
  c.set("delta", "-1");
  EXPECT_THROW(c.deferral(), InvalidArgument);
}

TEST(RunConfig, SetAndEntriesRoundTrip) {
  RunConfig a;
  a.set("learning_rate", "0.0025");
  a.set("optimizer", "sgd");
  a.set("online_deferral", "true");
  a.set("out", "elsewhere");
  RunConfig b;
  for (const auto& [k, v] : a.entries()) b.set(k, v);
  EXPECT_EQ(b.entries(), a.entries());
  EXPECT_EQ(b.learning_rate, 0.0025);
  EXPECT_EQ(b.optimizer, Optimizer::Sgd);
  EXPECT_TRUE(b.online_deferral);
}

TEST(RunConfig, RejectsBadInput) {
  RunConfig c;
  EXPECT_THROW(c.set("no_such_key", "1"), InvalidArgument);
  EXPECT_THROW(c.set("phi", "ten"), InvalidArgument);
  EXPECT_THROW(c.set("phi", "10x"), InvalidArgument);
  EXPECT_THROW(c.set("hidden_layers", "3"), InvalidArgument);
  EXPECT_THROW(c.set("online_deferral", "maybe"), InvalidArgument);
}

TEST(ApplyConfig, ParsesCommentsAndWhitespace) {
  RunConfig c;
  std::istringstream in("# a comment\n\n  phi = 4 \nseed=99\r\n");
  apply_config(c, in);
  EXPECT_EQ(c.phi, 4);
  EXPECT_EQ(c.seed, 99u);
  std::istringstream bad("phi 4\n");
  EXPECT_THROW(apply_config(c, bad), InvalidArgument);
  std::istringstream unknown("colour=blue\n");
  EXPECT_THROW(apply_config(c, unknown), InvalidArgument);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/config.cfg"), DataError);
}

TEST(RunLock, RecordsEverything) {
  RunConfig c;
  c.seed = 5;
  const auto j = run_lock(c, "generate", {"camoe", "generate", "--seed", "5"});
  EXPECT_EQ(j["format"], "camoe-run-lock");
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_EQ(j["command"], "generate");
  EXPECT_EQ(j["argv"].size(), 4u);
  EXPECT_EQ(j["config"]["seed"], "5");
  EXPECT_EQ(j["config"].size(), c.entries().size());
}
