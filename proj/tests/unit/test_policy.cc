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

#include "bptts/policy.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace bptts {
namespace {

namespace fs = std::filesystem;

StencilObservation<double> random_obs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  StencilObservation<double> o;
  for (auto& x : o.plus) x = u(rng);
  for (auto& x : o.minus) x = u(rng);
  return o;
}

TEST(Policy, ParameterCount) {
  EXPECT_EQ(PolicyParams::kCount, 18694u);
  EXPECT_EQ(PolicyParams{}.values.size(), 18694u);
}

TEST(Policy, ZeroHeadGivesUniformWeights) {
  std::mt19937_64 rng(1);
  const PolicyParams p = init_params(3);
  for (int i = 0; i < 20; ++i) {
    const auto w = policy_forward(random_obs(rng), p);
    for (int k = 0; k < 3; ++k) {
      EXPECT_DOUBLE_EQ(w.plus[k], 1.0 / 3.0);
      EXPECT_DOUBLE_EQ(w.minus[k], 1.0 / 3.0);
    }
  }
}

TEST(Policy, OutputsAreConvex) {
  std::mt19937_64 rng(2);
  const PolicyParams p = random_params(7, 1.0);
  for (int i = 0; i < 200; ++i) {
    EXPECT_TRUE(is_convex(policy_forward(random_obs(rng), p)));
  }
}

TEST(Policy, BatchMatchesSingle) {
  std::mt19937_64 rng(3);
  const PolicyParams p = random_params(8);
  std::vector<StencilObservation<double>> obs;
  for (int i = 0; i < 17; ++i) obs.push_back(random_obs(rng));
  const auto batch = policy_forward(obs, p);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto one = policy_forward(obs[i], p);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(batch[i].plus[k], one.plus[k], 1e-15);
      EXPECT_NEAR(batch[i].minus[k], one.minus[k], 1e-15);
    }
  }
}

TEST(Policy, SameSeedSameParameters) {
  EXPECT_EQ(init_params(5), init_params(5));
  EXPECT_NE(init_params(5), init_params(6));
  EXPECT_EQ(random_params(5), random_params(5));
  const PolicyParams p = init_params(5, HeadInit::kZero);
  for (std::size_t i = PolicyParams::kW3; i < PolicyParams::kCount; ++i) {
    EXPECT_EQ(p.values[i], 0.0);
  }
  const PolicyParams r = init_params(5, HeadInit::kRandom);
  double s = 0.0;
  for (std::size_t i = PolicyParams::kW3; i < PolicyParams::kB3; ++i) {
    s += std::abs(r.values[i]);
  }
  EXPECT_GT(s, 0.0);
}

TEST(Policy, TapedForwardMatchesPlain) {
  std::mt19937_64 rng(4);
  const PolicyParams p = random_params(9);
  std::vector<StencilObservation<double>> obs;
  for (int i = 0; i < 5; ++i) obs.push_back(random_obs(rng));
  ad::Tape t;
  TapedPolicy taped(t, p);
  EXPECT_EQ(taped.leaves().size(), PolicyParams::kCount);
  std::vector<StencilObservation<ad::Var>> vobs(obs.size());
  for (std::size_t b = 0; b < obs.size(); ++b) {
    for (int k = 0; k < 5; ++k) {
      vobs[b].plus[k] = t.constant(obs[b].plus[k]);
      vobs[b].minus[k] = t.constant(obs[b].minus[k]);
    }
  }
  const auto w = taped.forward(vobs);
  const auto ref = policy_forward(obs, p);
  for (std::size_t b = 0; b < obs.size(); ++b) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_EQ(w[b].plus[k].value(), ref[b].plus[k]);
      EXPECT_EQ(w[b].minus[k].value(), ref[b].minus[k]);
    }
  }
}

TEST(Policy, TapedGradientMatchesFiniteDifference) {
  std::mt19937_64 rng(5);
  const PolicyParams p = random_params(10);
  const auto obs = random_obs(rng);
  ad::Tape t;
  TapedPolicy taped(t, p);
  std::vector<StencilObservation<ad::Var>> vobs(1);
  for (int k = 0; k < 5; ++k) {
    vobs[0].plus[k] = t.constant(obs.plus[k]);
    vobs[0].minus[k] = t.constant(obs.minus[k]);
  }
  const auto w = taped.forward(vobs);
  const ad::GradientMap g = t.backward(w[0].plus[1]);
  const double h = 1e-6;
  for (std::size_t i : {std::size_t{0}, PolicyParams::kB1 + 3,
                        PolicyParams::kW2 + 500, PolicyParams::kW3 + 130,
                        PolicyParams::kB3 + 1, PolicyParams::kB3 + 4}) {
    PolicyParams pp = p, pm = p;
    pp.values[i] += h;
    pm.values[i] -= h;
    const double fd = (policy_forward(obs, pp).plus[1] -
                       policy_forward(obs, pm).plus[1]) / (2 * h);
    EXPECT_NEAR(g.values[i], fd, 1e-8) << i;
  }
}

TEST(Policy, NonFiniteParametersRejected) {
  PolicyParams p = random_params(1);
  p.values[PolicyParams::kW2 + 3] = std::nan("");
  EXPECT_FALSE(p.all_finite());
  std::mt19937_64 rng(6);
  EXPECT_THROW(policy_forward(random_obs(rng), p), ParameterError);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  const fs::path dir = fs::temp_directory_path() / "bptts_policy_test";
  fs::create_directories(dir);
  const PolicyParams p = random_params(11);
  save_params(dir / "a.bin", p);
  const PolicyParams q = load_params(dir / "a.bin");
  EXPECT_EQ(p, q);
  save_params(dir / "b.bin", q);
  auto read = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(read(dir / "a.bin"), read(dir / "b.bin"));
  fs::remove_all(dir);
}

TEST(Checkpoint, CorruptInputsRejected) {
  const std::string bytes = encode_params(random_params(12));
  EXPECT_EQ(decode_params(bytes), random_params(12));
  EXPECT_THROW(decode_params(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(decode_params(bytes.substr(0, 10)), FormatError);
  std::string bad_magic = bytes;
  bad_magic[0] ^= 0x55;
  EXPECT_THROW(decode_params(bad_magic), FormatError);
  EXPECT_THROW(decode_params(bytes + "x"), FormatError);
  EXPECT_THROW(load_params("/nonexistent/policy.bin"), FormatError);
}

}  // namespace
}  // namespace bptts
