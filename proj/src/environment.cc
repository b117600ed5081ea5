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

#include <algorithm>
#include <string>

namespace bptts {

std::string_view to_string(System s) {
  return s == System::kBurgers ? "burgers" : "euler";
}

System parse_system(std::string_view name) {
  if (name == "burgers") return System::kBurgers;
  if (name == "euler") return System::kEuler;
  throw ConfigError("unknown system '" + std::string(name) + "'");
}

void EnvSpec::validate() const {
  Grid::make(grid.n, grid.x_min, grid.x_max, grid.boundary);
  if (dt.kind == DtMode::Kind::kFixed && !(dt.value > 0.0)) {
    throw ConfigError("fixed dt must be > 0");
  }
  if (dt.kind == DtMode::Kind::kCfl && !(dt.value > 0.0 && dt.value <= 1.0)) {
    throw ConfigError("CFL number must lie in (0, 1]");
  }
  if (system == System::kEuler && gamma != euler::kGamma) {
    throw ConfigError("Euler environments use gamma = 1.4");
  }
  if (steps < 1) throw ConfigError("episode needs at least one step");
  weno.validate();
}

bool is_admissible(const FieldState<double>& state, const EnvSpec& spec) {
  // Finite values are not enough: the next step needs finite split fluxes,
  // and those scale like alpha * |q|.
  double alpha = 0.0, qmax = 0.0;
  for (const auto& c : state.components) {
    for (double v : c) {
      if (!std::isfinite(v)) return false;
      qmax = std::max(qmax, std::abs(v));
    }
  }
  if (spec.system != System::kEuler) {
    return std::isfinite(qmax * qmax);
  }
  for (int j = 0; j < state.size(); ++j) {
    const double rho = state.components[0][j];
    if (!(rho > 0.0)) return false;
    const double p = euler::pressure(rho, state.components[1][j],
                                     state.components[2][j], spec.gamma);
    if (!(p > 0.0)) return false;
    const auto f = euler::flux(rho, state.components[1][j],
                               state.components[2][j], spec.gamma);
    for (double x : f) {
      if (!std::isfinite(x)) return false;
    }
    alpha = std::max(alpha, std::abs(state.components[1][j] / rho) +
                                std::sqrt(spec.gamma * p / rho));
  }
  return std::isfinite(alpha * qmax);
}

void check_admissible(const FieldState<double>& state, const EnvSpec& spec,
                      int step) {
  if (!is_admissible(state, spec)) {
    throw BlowupError(step, "state left the admissible set");
  }
}

FieldState<ad::Var> detach(const FieldState<double>& state, ad::Tape& tape) {
  FieldState<ad::Var> out;
  out.time = state.time;
  for (const auto& c : state.components) {
    std::vector<ad::Var> v;
    v.reserve(c.size());
    for (double x : c) v.push_back(tape.constant(x));
    out.components.push_back(std::move(v));
  }
  return out;
}

double compute_dt(const FieldState<double>& state, const EnvSpec& spec) {
  if (spec.dt.kind == DtMode::Kind::kFixed) return spec.dt.value;
  const double alpha = std::max(max_wavespeed(state, spec), 1e-12);
  return spec.dt.value * spec.grid.dx() / alpha;
}

}  // namespace bptts
