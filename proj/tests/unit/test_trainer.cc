// Copyright 2026 The BPTTS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bptts/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bptts/initial_conditions.h"

namespace bptts {
namespace {

namespace fs = std::filesystem;

Episode small_episode(const std::string& ic_name, int n = 16, int steps = 6,
                      double dt = 2e-3,
                      RewardVariant reward = RewardVariant::kMarkovian) {
  const ICSpec ic = make_ic(ic_name);
  return make_episode(ic, make_env(ic, n, DtMode::fixed(dt), steps), reward);
}

bool bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

TEST(Reward, Parse) {
  for (auto r : {RewardVariant::kMarkovian, RewardVariant::kFixedWeno,
                 RewardVariant::kFixedTrue}) {
    EXPECT_EQ(parse_reward(to_string(r)), r);
  }
  EXPECT_THROW(parse_reward("shaped"), ConfigError);
}

TEST(Rollout, WenoEarnsZeroReward) {
  for (const std::string& name : burgers_ic_names()) {
    const RolloutResult r = rollout(small_episode(name), nullptr);
    EXPECT_EQ(r.total_reward, 0.0) << name;
    EXPECT_EQ(r.states.size(), 7u);
    EXPECT_EQ(r.rewards.size(), 6u);
    EXPECT_EQ(r.rewards[0].size(), 17u);
  }
}

TEST(Rollout, RecordedMatchesPlain) {
  const Episode ep = small_episode("accelerating_shock");
  const PolicyParams p = random_params(3);
  const RolloutResult plain = rollout(ep, &p);
  const RecordedRollout rec = record_rollout(ep, p);
  ASSERT_EQ(plain.states.size(), rec.result.states.size());
  for (std::size_t t = 0; t < plain.states.size(); ++t) {
    for (std::size_t j = 0; j < plain.states[t].components[0].size(); ++j) {
      EXPECT_TRUE(bit_equal(plain.states[t].components[0][j],
                            rec.result.states[t].components[0][j]));
    }
  }
  EXPECT_TRUE(bit_equal(plain.total_reward, rec.result.total_reward));
  EXPECT_DOUBLE_EQ(rec.objective.value(), plain.total_reward);
}

TEST(Rollout, ObjectiveIsSumOfRewards) {
  const Episode ep = small_episode("rarefaction");
  const PolicyParams p = random_params(4);
  const RolloutResult r = rollout(ep, &p);
  double s = 0.0;
  for (const auto& step : r.rewards) {
    for (double x : step) s += x;
  }
  EXPECT_NEAR(r.total_reward, s, 1e-15 * (1 + std::abs(s)));
  EXPECT_LT(r.total_reward, 0.0);
}

TEST(Rollout, ConstantStateGivesZeroObjectiveAndGradient) {
  Episode ep = small_episode("standing_sine");
  ep.initial.components[0].assign(16, 0.7);
  const RecordedRollout rec = record_rollout(ep, init_params(0));
  EXPECT_EQ(rec.result.total_reward, 0.0);
  for (double g : episode_gradient(rec)) EXPECT_EQ(g, 0.0);
}

TEST(Rollout, FixedWenoMatchesMarkovianForWeno) {
  const Episode ep =
      small_episode("tophat", 16, 6, 2e-3, RewardVariant::kFixedWeno);
  ASSERT_EQ(ep.fixed_anchor.size(), 7u);
  EXPECT_EQ(rollout(ep, nullptr).total_reward, 0.0);
  // First-step rewards coincide with the Markovian variant for any policy.
  const Episode mk = small_episode("tophat");
  const PolicyParams p = random_params(5);
  EXPECT_EQ(rollout(ep, &p, 1).rewards[0], rollout(mk, &p, 1).rewards[0]);
}

TEST(Rollout, FixedTrueNeedsFixedDt) {
  const ICSpec ic = make_ic("rarefaction");
  EXPECT_THROW(make_episode(ic, make_env(ic, 16, DtMode::cfl(0.1), 4),
                            RewardVariant::kFixedTrue),
               ConfigError);
  const Episode ep =
      small_episode("rarefaction", 16, 4, 2e-3, RewardVariant::kFixedTrue);
  EXPECT_EQ(ep.fixed_anchor.size(), 5u);
  EXPECT_LT(rollout(ep, nullptr).total_reward, 0.0);
}

TEST(Rollout, BlowupTruncatesEpisode) {
  // dt far above the stability limit.
  const Episode ep = small_episode("accelerating_shock", 16, 200, 0.2);
  const PolicyParams p = random_params(6);
  const RecordedRollout rec = record_rollout(ep, p);
  ASSERT_TRUE(rec.result.blew_up());
  const int k = *rec.result.blowup_step;
  EXPECT_EQ(static_cast<int>(rec.result.rewards.size()), k - 1);
  EXPECT_EQ(rec.result.states.size(), rec.result.rewards.size() + 1);
  // The gradient covers exactly the recorded steps.
  const auto g = episode_gradient(rec);
  if (k - 1 > 0) {
    const RecordedRollout shorter = record_rollout(ep, p, k - 1);
    ASSERT_FALSE(shorter.result.blew_up());
    const auto gs = episode_gradient(shorter);
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_EQ(g[i], gs[i]) << i;
  }
}

TEST(Gradient, BatchOfCopiesScales) {
  const Episode ep = small_episode("double_sine");
  const PolicyParams p = random_params(7);
  const std::vector<Episode> one = {ep};
  const std::vector<Episode> three = {ep, ep, ep};
  const auto g1 = bptts_gradient(one, p);
  const auto g3 = bptts_gradient(three, p, 2);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    EXPECT_NEAR(g3[i], 3.0 * g1[i], 1e-15 * (1 + std::abs(g1[i])));
  }
}

TEST(Gradient, ThreadCountDoesNotChangeResult) {
  std::vector<Episode> batch = {small_episode("standing_sine"),
                                small_episode("rarefaction"),
                                small_episode("accelerating_shock")};
  const PolicyParams p = random_params(8);
  const auto a = bptts_gradient(batch, p, 1);
  const auto b = bptts_gradient(batch, p, 3);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_TRUE(bit_equal(a[i], b[i]));
}

TEST(Adam, ZeroGradientLeavesParameters) {
  PolicyParams p = random_params(9);
  const PolicyParams before = p;
  AdamState s;
  std::vector<double> g(PolicyParams::kCount, 0.0);
  EXPECT_TRUE(adam_step(p, g, s, AdamOptions{}));
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRateUphill) {
  PolicyParams p = random_params(10);
  const PolicyParams before = p;
  AdamState s;
  std::vector<double> g(PolicyParams::kCount);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (i % 2 ? 1.0 : -2.0);
  AdamOptions o;
  EXPECT_TRUE(adam_step(p, g, s, o));
  for (std::size_t i = 0; i < g.size(); i += 97) {
    const double step = p.values[i] - before.values[i];
    EXPECT_NEAR(step, o.learning_rate * (g[i] > 0 ? 1 : -1), 1e-10);
  }
}

TEST(Adam, NonFiniteGradientSkipsStep) {
  PolicyParams p = random_params(11);
  const PolicyParams before = p;
  AdamState s;
  std::vector<double> g(PolicyParams::kCount, 1.0);
  g[5] = std::nan("");
  EXPECT_FALSE(adam_step(p, g, s, AdamOptions{}));
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 0);
  g.resize(3);
  EXPECT_THROW(adam_step(p, g, s, AdamOptions{}), ConfigError);
}

TrainConfig tiny_config(const fs::path& out) {
  TrainConfig c;
  c.ics = {"standing_sine", "rarefaction"};
  c.n = 16;
  c.steps = 8;
  c.dt = DtMode::fixed(2e-3);
  c.episodes = 8;
  c.eval_every = 4;
  c.adam.learning_rate = 1e-3;
  c.seed = 42;
  c.out_dir = out;
  c.log_wallclock = false;
  return c;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Train, DeterministicAcrossRuns) {
  const fs::path base = fs::temp_directory_path() / "bptts_train_det";
  fs::remove_all(base);
  train(tiny_config(base / "a"));
  train(tiny_config(base / "b"));
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(base / "a")) {
    names.push_back(e.path().filename().string());
  }
  EXPECT_GE(names.size(), 5u);
  for (const std::string& n : names) {
    EXPECT_EQ(slurp(base / "a" / n), slurp(base / "b" / n)) << n;
  }
  fs::remove_all(base);
}

TEST(Train, LogAndCheckpoints) {
  const fs::path dir = fs::temp_directory_path() / "bptts_train_log";
  fs::remove_all(dir);
  TrainConfig c = tiny_config(dir);
  c.eval_ics = {"tophat"};
  const TrainResult r = train(c);
  // Evaluations at 0, 4 and 8; two ICs per batch.
  ASSERT_EQ(r.evals.size(), 3u);
  EXPECT_EQ(r.evals[1].episode, 4);
  EXPECT_TRUE(fs::exists(dir / "checkpoint_000000.bin"));
  EXPECT_TRUE(fs::exists(dir / "checkpoint_000008.bin"));
  int train_rows = 0, held_out = 0;
  for (const LogEntry& e : r.log) {
    train_rows += e.eval_flag == 0;
    held_out += e.eval_flag == 2;
  }
  EXPECT_EQ(train_rows, 8);
  EXPECT_EQ(held_out, 3);
  const std::string csv = slurp(dir / "train_log.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "episode,ic_name,total_reward,eval_flag,wallclock");

  // The best checkpoint reproduces its selection reward.
  std::ifstream best(dir / "best");
  std::string key, ckpt;
  int episode = 0;
  double reward = 0.0;
  best >> key >> episode >> key >> reward >> key >> ckpt;
  EXPECT_EQ(episode, r.best_episode);
  const PolicyParams p = load_params(dir / ckpt);
  EXPECT_EQ(p, r.best);
  std::vector<Episode> eps;
  for (const auto& name : c.ics) {
    const ICSpec ic = make_ic(name);
    eps.push_back(make_episode(ic, make_env(ic, c.n, c.dt, c.steps)));
  }
  EXPECT_EQ(evaluate_total_reward(eps, &p), r.best_reward);
  fs::remove_all(dir);
}

TEST(Train, AbortsAfterRepeatedBlowups) {
  TrainConfig c = tiny_config({});
  c.ics = {"accelerating_shock"};
  c.dt = DtMode::fixed(0.5);
  c.steps = 50;
  c.episodes = 100;
  EXPECT_THROW(train(c), BlowupError);
}

TEST(Train, ConfigValidation) {
  TrainConfig c = tiny_config({});
  c.ics.clear();
  EXPECT_THROW(train(c), ConfigError);
  c = tiny_config({});
  c.eval_every = 0;
  EXPECT_THROW(train(c), ConfigError);
}

}  // namespace
}  // namespace bptts
