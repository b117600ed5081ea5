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

#include "bptts/grid.h"

#include <cmath>
#include <string>

namespace bptts {

std::string_view to_string(Boundary b) {
  return b == Boundary::kPeriodic ? "periodic" : "outflow";
}

Boundary parse_boundary(std::string_view name) {
  if (name == "periodic") return Boundary::kPeriodic;
  if (name == "outflow") return Boundary::kOutflow;
  throw ConfigError("unknown boundary '" + std::string(name) + "'");
}

Grid Grid::make(int n, double x_min, double x_max, Boundary boundary) {
  // A 5-point stencil plus the interface offset needs 7 cells.
  if (n < 7) throw ConfigError("grid needs at least 7 cells");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ConfigError("grid bounds must satisfy x_min < x_max");
  }
  return Grid{n, x_min, x_max, boundary};
}

std::vector<double> Grid::cell_centers() const {
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = cell_center(j);
  return x;
}

double l2_error(const FieldState<double>& a, const FieldState<double>& b,
                const Grid& grid) {
  if (a.num_components() != b.num_components() || a.size() != b.size() ||
      a.size() != grid.n || a.num_components() == 0) {
    throw ConfigError("l2_error: shape mismatch");
  }
  const double dx = grid.dx();
  double mean = 0.0;
  for (int c = 0; c < a.num_components(); ++c) {
    double acc = 0.0;
    for (int j = 0; j < grid.n; ++j) {
      const double d = a.components[c][j] - b.components[c][j];
      acc += d * d;
    }
    mean += std::sqrt(dx * acc);
  }
  return mean / a.num_components();
}

double total_mass(const FieldState<double>& state, int component,
                  const Grid& grid) {
  double s = 0.0;
  for (double v : state.components.at(component)) s += v;
  return s * grid.dx();
}

}  // namespace bptts
