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

#ifndef BPTTS_INITIAL_CONDITIONS_H_
#define BPTTS_INITIAL_CONDITIONS_H_

#include <array>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bptts/environment.h"
#include "bptts/euler.h"
#include "bptts/grid.h"

namespace bptts {

enum class RandomFamily { kSine, kShock, kRarefaction };

// A named initial condition with its domain, boundary and evaluation end
// time. Burgers ICs are closed-form functions of x (random families carry
// their drawn constants); Euler ICs are shock tubes split at the domain
// midpoint.
struct ICSpec {
  std::string name;
  System system = System::kBurgers;
  Boundary boundary = Boundary::kPeriodic;
  double x_min = 0.0;
  double x_max = 1.0;
  double t_max = 0.2;
  // Random-family constants (a, b, c, k, phi); unused for named ICs.
  std::array<double, 5> constants{};
  euler::Primitive left{};
  euler::Primitive right{};

  Grid grid(int n) const { return Grid::make(n, x_min, x_max, boundary); }
  // Conserved-variable state at t = 0 on an n-cell grid.
  FieldState<double> initial_state(int n) const;
  // Point value of the Burgers IC at x.
  double burgers_value(double x) const;
};

const std::vector<std::string>& burgers_ic_names();
const std::vector<std::string>& euler_ic_names();

// Named IC from the Burgers or Euler tables, or a random family
// ("random_sine", "random_shock", "random_rarefaction") drawn from `rng`.
ICSpec make_ic(std::string_view name, std::mt19937_64* rng = nullptr);

// Burgers u0 at the given points.
std::vector<double> burgers_ic(std::string_view name, std::span<const double> x,
                               std::mt19937_64* rng = nullptr);

// Euler primitive fields (rho, u, p) at the given points.
std::array<std::vector<double>, 3> euler_ic(std::string_view name,
                                            std::span<const double> x);

ICSpec sample_random_ic(RandomFamily family, std::mt19937_64& rng);

// round(2^U) with U ~ U[log2 64, log2 1024].
int sample_grid_size(std::mt19937_64& rng);

struct RandomEnv {
  ICSpec ic;
  int n = 0;
};

// Family uniform over the three random families.
RandomEnv sample_random_env(std::mt19937_64& rng);
RandomEnv sample_random_env(RandomFamily family, std::mt19937_64& rng);

// Environment for an IC at resolution n.
EnvSpec make_env(const ICSpec& ic, int n, DtMode dt, int steps);

}  // namespace bptts

#endif  // BPTTS_INITIAL_CONDITIONS_H_
