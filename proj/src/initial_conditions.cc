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

#include "bptts/initial_conditions.h"

#include <cmath>
#include <numbers>

namespace bptts {
namespace {

constexpr double kPi = std::numbers::pi;

enum Const { kA = 0, kB = 1, kC = 2, kK = 3, kPhi = 4 };

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ICSpec burgers_spec(std::string name, Boundary boundary) {
  ICSpec ic;
  ic.name = std::move(name);
  ic.system = System::kBurgers;
  ic.boundary = boundary;
  ic.x_min = 0.0;
  ic.x_max = 1.0;
  ic.t_max = 0.2;
  return ic;
}

ICSpec tube(std::string name, euler::Primitive l, euler::Primitive r,
            double x_min, double x_max, double t_max) {
  ICSpec ic;
  ic.name = std::move(name);
  ic.system = System::kEuler;
  ic.boundary = Boundary::kOutflow;
  ic.x_min = x_min;
  ic.x_max = x_max;
  ic.t_max = t_max;
  ic.left = l;
  ic.right = r;
  return ic;
}

}  // namespace

const std::vector<std::string>& burgers_ic_names() {
  static const std::vector<std::string> names = {
      "standing_sine", "rarefaction", "accelerating_shock",
      "double_sine",   "gaussian",    "tophat"};
  return names;
}

const std::vector<std::string>& euler_ic_names() {
  static const std::vector<std::string> names = {"sod", "sod2", "lax",
                                                 "sonic_rarefaction"};
  return names;
}

ICSpec sample_random_ic(RandomFamily family, std::mt19937_64& rng) {
  switch (family) {
    case RandomFamily::kSine: {
      ICSpec ic = burgers_spec("random_sine", Boundary::kPeriodic);
      const double mag = uniform(rng, 0.2, 1.0);
      const bool negative = std::bernoulli_distribution(0.5)(rng);
      ic.constants[kA] = negative ? -mag : mag;
      ic.constants[kK] =
          2.0 * std::uniform_int_distribution<int>(1, 5)(rng);
      return ic;
    }
    case RandomFamily::kShock: {
      ICSpec ic = burgers_spec("random_shock", Boundary::kOutflow);
      ic.constants[kC] = uniform(rng, 0.5, 5.0);
      ic.constants[kA] = uniform(rng, 0.0, 5.0);
      ic.constants[kPhi] = uniform(rng, 0.0, 0.5);
      return ic;
    }
    case RandomFamily::kRarefaction: {
      ICSpec ic = burgers_spec("random_rarefaction", Boundary::kOutflow);
      ic.constants[kC] = uniform(rng, -1.0, 1.0);
      ic.constants[kA] = uniform(rng, 0.25, 1.5);
      ic.constants[kB] = uniform(rng, 20.0, 100.0);
      return ic;
    }
  }
  throw ConfigError("unknown random family");
}

ICSpec make_ic(std::string_view name, std::mt19937_64* rng) {
  if (name == "standing_sine" || name == "double_sine") {
    return burgers_spec(std::string(name), Boundary::kPeriodic);
  }
  if (name == "rarefaction" || name == "accelerating_shock" ||
      name == "gaussian" || name == "tophat") {
    return burgers_spec(std::string(name), Boundary::kOutflow);
  }
  if (name == "sod") {
    return tube("sod", {1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}, -0.5, 0.5, 0.2);
  }
  if (name == "sod2") {
    return tube("sod2", {1.0, 0.0, 1.0}, {0.01, 0.0, 0.01}, -0.5, 0.5, 0.2);
  }
  if (name == "lax") {
    return tube("lax", {0.445, 0.689, 3.528}, {0.5, 0.0, 0.571}, -0.5, 0.5,
                0.14);
  }
  if (name == "sonic_rarefaction") {
    return tube("sonic_rarefaction", {3.857, 0.92, 10.333}, {1.0, 3.55, 1.0},
                -5.0, 5.0, 0.7);
  }
  if (name == "random_sine" || name == "random_shock" ||
      name == "random_rarefaction") {
    if (rng == nullptr) {
      throw ConfigError("random IC '" + std::string(name) + "' needs an rng");
    }
    const RandomFamily f = name == "random_sine"    ? RandomFamily::kSine
                           : name == "random_shock" ? RandomFamily::kShock
                                                    : RandomFamily::kRarefaction;
    return sample_random_ic(f, *rng);
  }
  throw ConfigError("unknown initial condition '" + std::string(name) + "'");
}

double ICSpec::burgers_value(double x) const {
  if (name == "standing_sine") {
    return 0.1 * (1.0 / (2.0 * kPi)) * std::sin(2.0 * kPi * x);
  }
  if (name == "rarefaction") return x <= 0.5 ? 1.0 : 2.0;
  if (name == "accelerating_shock") return x <= 0.25 ? 3.0 : 3.0 * (x - 1.0);
  if (name == "double_sine") return 0.25 + 0.5 * std::sin(4.0 * kPi * x);
  if (name == "gaussian") return 1.0 + std::exp(-60.0 * (x - 0.5) * (x - 0.5));
  if (name == "tophat") {
    return (x > 1.0 / 3.0 && x < 2.0 / 3.0) ? 1.0 : 0.0;
  }
  const double a = constants[kA];
  if (name == "random_sine") {
    return 3.5 - std::abs(a) + a * std::sin(constants[kK] * kPi * x);
  }
  if (name == "random_shock") {
    return x <= constants[kPhi] ? constants[kC] : a * (x - 1.0);
  }
  if (name == "random_rarefaction") {
    return constants[kC] + a * std::tanh(constants[kB] * (x - 0.5));
  }
  throw ConfigError("'" + name + "' is not a Burgers initial condition");
}

FieldState<double> ICSpec::initial_state(int n) const {
  const Grid g = grid(n);
  const std::vector<double> x = g.cell_centers();
  FieldState<double> s;
  if (system == System::kBurgers) {
    std::vector<double> u;
    u.reserve(x.size());
    for (double xi : x) u.push_back(burgers_value(xi));
    s.components.push_back(std::move(u));
    return s;
  }
  s.components.assign(3, std::vector<double>(x.size()));
  const double mid = 0.5 * (x_min + x_max);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto q = euler::to_conserved(x[j] <= mid ? left : right);
    for (int c = 0; c < 3; ++c) s.components[c][j] = q[c];
  }
  return s;
}

std::vector<double> burgers_ic(std::string_view name,
                               std::span<const double> x,
                               std::mt19937_64* rng) {
  const ICSpec ic = make_ic(name, rng);
  if (ic.system != System::kBurgers) {
    throw ConfigError("'" + std::string(name) + "' is not a Burgers IC");
  }
  std::vector<double> u;
  u.reserve(x.size());
  for (double xi : x) u.push_back(ic.burgers_value(xi));
  return u;
}

std::array<std::vector<double>, 3> euler_ic(std::string_view name,
                                            std::span<const double> x) {
  const ICSpec ic = make_ic(name);
  if (ic.system != System::kEuler) {
    throw ConfigError("'" + std::string(name) + "' is not an Euler IC");
  }
  const double mid = 0.5 * (ic.x_min + ic.x_max);
  std::array<std::vector<double>, 3> w;
  for (double xi : x) {
    const euler::Primitive& s = xi <= mid ? ic.left : ic.right;
    w[0].push_back(s.rho);
    w[1].push_back(s.u);
    w[2].push_back(s.p);
  }
  return w;
}

int sample_grid_size(std::mt19937_64& rng) {
  const double e = uniform(rng, std::log2(64.0), std::log2(1024.0));
  return static_cast<int>(std::lround(std::exp2(e)));
}

RandomEnv sample_random_env(RandomFamily family, std::mt19937_64& rng) {
  RandomEnv env;
  env.n = sample_grid_size(rng);
  env.ic = sample_random_ic(family, rng);
  return env;
}

RandomEnv sample_random_env(std::mt19937_64& rng) {
  const int f = std::uniform_int_distribution<int>(0, 2)(rng);
  return sample_random_env(static_cast<RandomFamily>(f), rng);
}

EnvSpec make_env(const ICSpec& ic, int n, DtMode dt, int steps) {
  EnvSpec env;
  env.system = ic.system;
  env.grid = ic.grid(n);
  env.dt = dt;
  env.steps = steps;
  env.validate();
  return env;
}

}  // namespace bptts
