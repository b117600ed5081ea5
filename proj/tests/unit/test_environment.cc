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

#include "bptts/environment.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bptts/initial_conditions.h"
#include "bptts/policy.h"

namespace bptts {
namespace {

FieldState<double> burgers(std::vector<double> u) {
  FieldState<double> s;
  s.components.push_back(std::move(u));
  return s;
}

EnvSpec burgers_env(int n, Boundary b = Boundary::kPeriodic,
                    double dt = 1e-3) {
  EnvSpec e;
  e.grid = Grid::make(n, 0.0, 1.0, b);
  e.dt = DtMode::fixed(dt);
  e.steps = 10;
  return e;
}

TEST(Observe, ConstantStateSeesConstantSplitFlux) {
  const EnvSpec env = burgers_env(8);
  const auto obs = observe(burgers(std::vector<double>(8, 1.0)), env);
  ASSERT_EQ(obs.size(), 9u);
  for (const auto& o : obs) {
    for (double x : o.plus) EXPECT_DOUBLE_EQ(x, 0.75);
    for (double x : o.minus) EXPECT_DOUBLE_EQ(x, -0.25);
  }
}

TEST(Observe, PeriodicStencilIndices) {
  // With alpha = 0 the split fluxes are f/2; f = u^2/2 keeps the cell id
  // recoverable from u = sqrt(4 * value). Use u_j = j + 1 and alpha via
  // max |u| instead: plus = (f + alpha u) / 2 is monotone in u >= 0.
  const int n = 8;
  std::vector<double> u(n);
  for (int j = 0; j < n; ++j) u[j] = j + 1.0;
  const EnvSpec env = burgers_env(n);
  const auto obs = observe(burgers(u), env);
  const double alpha = 8.0;
  auto cell_of_plus = [&](double v) {
    for (int j = 0; j < n; ++j) {
      if (v == 0.5 * (0.5 * u[j] * u[j] + alpha * u[j])) return j;
    }
    return -1;
  };
  auto cell_of_minus = [&](double v) {
    for (int j = 0; j < n; ++j) {
      if (v == 0.5 * (0.5 * u[j] * u[j] - alpha * u[j])) return j;
    }
    return -1;
  };
  // Interface i is the left face of cell i: plus uses cells i-3..i+1,
  // minus uses cells i+2 down to i-2.
  for (int i = 0; i <= n; ++i) {
    for (int k = 0; k < 5; ++k) {
      EXPECT_EQ(cell_of_plus(obs[i].plus[k]), ((i - 3 + k) % n + n) % n);
      EXPECT_EQ(cell_of_minus(obs[i].minus[k]), ((i + 2 - k) % n + n) % n);
    }
  }
  EXPECT_EQ(cell_of_plus(obs[1].plus[0]), 6);
  EXPECT_EQ(cell_of_plus(obs[1].plus[4]), 2);
}

TEST(Observe, EulerAgentCount) {
  const ICSpec ic = make_ic("sod");
  const EnvSpec env = make_env(ic, 16, DtMode::fixed(1e-4), 5);
  EXPECT_EQ(observe(ic.initial_state(16), env).size(), 3u * 17u);
  EXPECT_EQ(env.num_agents(), 51);
}

TEST(Observe, ShapeMismatch) {
  const EnvSpec env = burgers_env(8);
  EXPECT_THROW(observe(burgers(std::vector<double>(9, 1.0)), env),
               ConfigError);
}

TEST(Normalize, ScalesByMaxAbs) {
  const auto s = normalize_stencil<double>({1, -4, 2, 0, 0.5});
  EXPECT_DOUBLE_EQ(s[1], -1.0);
  EXPECT_DOUBLE_EQ(s[0], 0.25);
  const auto z = normalize_stencil<double>({0, 0, 0, 0, 0});
  for (double x : z) EXPECT_EQ(x, 0.0);
}

TEST(Transition, ZeroDtIsIdentity) {
  const ICSpec ic = make_ic("double_sine");
  const EnvSpec env = make_env(ic, 32, DtMode::fixed(1e-3), 1);
  const auto s = ic.initial_state(32);
  const auto obs = observe(s, env);
  const auto next =
      transition(s, obs, weno_equivalent_policy(obs, env.weno), env, 0.0);
  EXPECT_EQ(next.components, s.components);
}

TEST(Transition, ConstantStateAnyConvexActions) {
  const EnvSpec env = burgers_env(16);
  const auto s = burgers(std::vector<double>(16, 1.3));
  const auto obs = observe(s, env);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1);
  std::vector<SubstencilWeights<double>> acts(obs.size());
  for (auto& a : acts) {
    for (auto* t : {&a.plus, &a.minus}) {
      const double x = u(rng), y = u(rng), z = u(rng);
      *t = {x / (x + y + z), y / (x + y + z), z / (x + y + z)};
    }
  }
  const auto next = transition(s, obs, acts, env, 1e-3);
  for (double v : next.components[0]) EXPECT_NEAR(v, 1.3, 1e-15);
}

TEST(Transition, ActionCountMismatch) {
  const EnvSpec env = burgers_env(8);
  const auto s = burgers(std::vector<double>(8, 1.0));
  std::vector<SubstencilWeights<double>> acts(3);
  EXPECT_THROW(transition(s, acts, env, 1e-3), ConfigError);
}

TEST(Transition, ConservesMassPeriodic) {
  const ICSpec ic = make_ic("double_sine");
  const EnvSpec env = make_env(ic, 64, DtMode::fixed(1e-3), 1);
  auto s = ic.initial_state(64);
  const double m0 = total_mass(s, 0, env.grid);
  const PolicyParams p = random_params(4);
  for (int t = 0; t < 50; ++t) {
    const auto obs = observe(s, env);
    const auto acts = policy_forward(obs, p);
    s = transition(s, obs, acts, env, 1e-3);
  }
  EXPECT_NEAR(total_mass(s, 0, env.grid), m0, 1e-12);
}

TEST(Reward, ActingLikeWenoGivesZero) {
  const ICSpec ic = make_ic("tophat");
  const EnvSpec env = make_env(ic, 32, DtMode::fixed(1e-3), 1);
  const auto s = ic.initial_state(32);
  const auto obs = observe(s, env);
  const auto next =
      transition(s, obs, weno_equivalent_policy(obs, env.weno), env, 1e-3);
  for (double r : reward_markovian(s, next, env, 1e-3)) EXPECT_EQ(r, 0.0);
}

TEST(Reward, SingleCellPerturbationSplitsInHalf) {
  FieldState<double> a = burgers(std::vector<double>(8, 0.0));
  FieldState<double> b = a;
  b.components[0][3] = 0.4;
  const auto r = interface_rewards(b, a);
  ASSERT_EQ(r.size(), 9u);
  for (int i = 0; i < 9; ++i) {
    EXPECT_DOUBLE_EQ(r[i], (i == 3 || i == 4) ? -0.2 : 0.0) << i;
  }
  b.components[0][3] = 0.0;
  b.components[0][0] = -0.4;
  const auto edge = interface_rewards(b, a);
  EXPECT_DOUBLE_EQ(edge[0], -0.2);
  EXPECT_DOUBLE_EQ(edge[1], -0.2);
}

TEST(Reward, EulerAveragesComponents) {
  FieldState<double> a, b;
  a.components.assign(3, std::vector<double>(8, 1.0));
  b = a;
  b.components[0][2] += 0.3;
  b.components[2][2] += 0.6;
  const auto r = interface_rewards(b, a);
  EXPECT_NEAR(r[2], -(0.15 + 0.3) / 3.0, 1e-15);
}

TEST(Reward, NonPositiveAndMismatchedDtRejected) {
  const ICSpec ic = make_ic("rarefaction");
  const EnvSpec env = make_env(ic, 32, DtMode::fixed(1e-3), 1);
  const auto s = ic.initial_state(32);
  const auto obs = observe(s, env);
  const auto next = transition(s, obs, policy_forward(obs, init_params(0)),
                               env, 1e-3);
  for (double r : reward_markovian(s, next, env, 1e-3)) EXPECT_LE(r, 0.0);
  EXPECT_THROW(reward_markovian(s, next, env, 2e-3), ConfigError);
}

TEST(Reward, FixedMatchesMarkovianOnFirstStep) {
  const ICSpec ic = make_ic("accelerating_shock");
  const EnvSpec env = make_env(ic, 32, DtMode::fixed(4e-4), 1);
  const auto s = ic.initial_state(32);
  const auto obs = observe(s, env);
  const auto w_next =
      transition(s, obs, weno_equivalent_policy(obs, env.weno), env, 4e-4);
  const auto u_next = transition(s, obs, policy_forward(obs, random_params(2)),
                                 env, 4e-4);
  EXPECT_EQ(reward_markovian(s, u_next, env, 4e-4),
            reward_fixed(u_next, w_next));
}

TEST(ComputeDt, FixedAndCfl) {
  EnvSpec env = burgers_env(128);
  auto s = burgers(std::vector<double>(128, 1.0));
  s.components[0][5] = -2.0;
  env.dt = DtMode::fixed(4e-4);
  EXPECT_EQ(compute_dt(s, env), 4e-4);
  env.dt = DtMode::cfl(0.5);
  EXPECT_DOUBLE_EQ(compute_dt(s, env), 0.001953125);
}

TEST(EnvSpec, Validation) {
  EnvSpec env = burgers_env(16);
  env.dt = DtMode::cfl(1.5);
  EXPECT_THROW(env.validate(), ConfigError);
  env.dt = DtMode::fixed(-1.0);
  EXPECT_THROW(env.validate(), ConfigError);
  EXPECT_EQ(parse_system("euler"), System::kEuler);
  EXPECT_THROW(parse_system("navier_stokes"), ConfigError);
}

TEST(Admissible, DetectsBlowup) {
  const EnvSpec env = burgers_env(8);
  auto s = burgers(std::vector<double>(8, 1.0));
  EXPECT_TRUE(is_admissible(s, env));
  s.components[0][2] = std::nan("");
  EXPECT_FALSE(is_admissible(s, env));
  try {
    check_admissible(s, env, 7);
    FAIL();
  } catch (const BlowupError& e) {
    EXPECT_EQ(e.step(), 7);
  }
}

TEST(Euler, Conversions) {
  const auto q = euler::to_conserved({1.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(q[0], 1.0);
  EXPECT_DOUBLE_EQ(q[1], 0.0);
  EXPECT_DOUBLE_EQ(q[2], 2.5);
  EXPECT_NEAR(euler::sound_speed(1.0, 1.0), 1.1832159566199232, 1e-15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.1, 5), vel(-3, 3);
  for (int i = 0; i < 100; ++i) {
    const euler::Primitive w{pos(rng), vel(rng), pos(rng)};
    const auto back = euler::to_conserved(euler::to_primitive(euler::to_conserved(w)));
    const auto ref = euler::to_conserved(w);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(back[c], ref[c], 1e-14 * (1 + std::abs(ref[c])));
  }
  const auto f = euler::flux(1.0, 0.0, 2.5);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
  EXPECT_DOUBLE_EQ(f[2], 0.0);
  EXPECT_THROW(euler::to_conserved({-1.0, 0.0, 1.0}), DomainError);
  EXPECT_THROW(euler::to_primitive({1.0, 0.0, -1.0}), DomainError);
}

TEST(Markov, CopiedStateContinuesIdentically) {
  const ICSpec ic = make_ic("double_sine");
  const EnvSpec env = make_env(ic, 32, DtMode::fixed(1e-3), 1);
  const PolicyParams p = random_params(5);
  auto step = [&](const FieldState<double>& s) {
    const auto obs = observe(s, env);
    const auto next = transition(s, obs, policy_forward(obs, p), env, 1e-3);
    return std::pair{next, reward_markovian(s, next, env, 1e-3)};
  };
  auto s = ic.initial_state(32);
  for (int t = 0; t < 10; ++t) s = step(s).first;
  const FieldState<double> copy = s;
  auto a = s, b = copy;
  for (int t = 0; t < 10; ++t) {
    auto [na, ra] = step(a);
    auto [nb, rb] = step(b);
    EXPECT_EQ(ra, rb);
    a = na, b = nb;
  }
  EXPECT_EQ(a.components, b.components);
}

}  // namespace
}  // namespace bptts
