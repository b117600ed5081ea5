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

#include "bptts/config.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bptts/error.h"

namespace bptts {
namespace {

TEST(Config, DefaultsDescribeBurgersTraining) {
  const RunConfig c;
  EXPECT_EQ(c.n, 128);
  EXPECT_EQ(c.steps, 250);
  EXPECT_EQ(c.dt, 4e-4);
  EXPECT_EQ(c.learning_rate, 3e-4);
  EXPECT_EQ(c.ics.size(), 3u);
  EXPECT_NO_THROW(c.validate());
  const TrainConfig t = c.train_config();
  EXPECT_EQ(t.dt.kind, DtMode::Kind::kFixed);
  EXPECT_EQ(t.adam.learning_rate, 3e-4);
}

TEST(Config, DumpParseRoundTrip) {
  RunConfig c;
  c.set("ics", "tophat, gaussian");
  c.set("dt", "0.00012345678901234567");
  c.set("grids", "64,128");
  c.set("gc_seeds", "1,2,3");
  c.set("normalize_obs", "false");
  c.set("reward", "fixed_weno");
  const RunConfig back = RunConfig::parse(c.dump());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.dump(), c.dump());
}

TEST(Config, ParseCommentsAndDefaults) {
  const RunConfig c = RunConfig::parse("# comment\n\n n = 64 \nseed=7\n");
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.steps, 250);
}

TEST(Config, Errors) {
  RunConfig c;
  EXPECT_THROW(c.set("learning_rat", "1"), ConfigError);
  EXPECT_THROW(c.set("n", "12x"), ConfigError);
  EXPECT_THROW(c.set("n", ""), ConfigError);
  EXPECT_THROW(c.set("normalize_obs", "maybe"), ConfigError);
  EXPECT_THROW(RunConfig::parse("n 64"), ConfigError);
  c.set("dt_mode", "adaptive");
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.set("system", "mhd");
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.set("gc_fault", "nonsense");
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(RunConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "bptts_cfg.txt";
  {
    std::ofstream f(path);
    f << "system = euler\nics = sod\ndt = 1e-4\nsteps = 1000\n";
  }
  const RunConfig c = RunConfig::load(path);
  EXPECT_EQ(c.system, "euler");
  EXPECT_EQ(c.train_config().system, System::kEuler);
  EXPECT_EQ(c.steps, 1000);
  std::filesystem::remove(path);
}

TEST(Config, EveryKeyReadable) {
  const RunConfig c;
  for (const std::string& k : RunConfig::keys()) EXPECT_NO_THROW(c.get(k)) << k;
  EXPECT_EQ(RunConfig::keys().front(), "system");
}

}  // namespace
}  // namespace bptts
