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

#ifndef BPTTS_GRID_H_
#define BPTTS_GRID_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bptts/error.h"

namespace bptts {

enum class Boundary { kPeriodic, kOutflow };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view name);

// Uniform 1-D grid of `n` cells on [x_min, x_max]. Cell j is centered at
// x_min + (j + 1/2) dx.
struct Grid {
  int n = 0;
  double x_min = 0.0;
  double x_max = 1.0;
  Boundary boundary = Boundary::kPeriodic;

  // Validates n >= 7 and x_max > x_min.
  static Grid make(int n, double x_min, double x_max, Boundary boundary);

  double dx() const { return (x_max - x_min) / n; }
  double length() const { return x_max - x_min; }
  double cell_center(int j) const { return x_min + (j + 0.5) * dx(); }
  std::vector<double> cell_centers() const;
};

// Conserved variables on a grid at one instant. One array per component
// (1 for Burgers; rho, rho*u, rho*E for Euler).
template <class S>
struct FieldState {
  std::vector<std::vector<S>> components;
  double time = 0.0;

  int num_components() const { return static_cast<int>(components.size()); }
  int size() const {
    return components.empty() ? 0 : static_cast<int>(components[0].size());
  }
};

// Copies of `values` padded with `width` ghost cells on both sides.
// Periodic ghosts wrap around; outflow ghosts repeat the edge cell.
template <class T>
std::vector<T> ghost_extend(std::span<const T> values, Boundary boundary,
                            int width) {
  const int n = static_cast<int>(values.size());
  if (width < 1) throw ConfigError("ghost width must be >= 1");
  if (width >= n) throw ConfigError("ghost width must be < cell count");
  std::vector<T> out;
  out.reserve(n + 2 * width);
  for (int k = -width; k < n + width; ++k) {
    int j = k;
    if (boundary == Boundary::kPeriodic) {
      j = (k % n + n) % n;
    } else {
      j = k < 0 ? 0 : (k >= n ? n - 1 : k);
    }
    out.push_back(values[j]);
  }
  return out;
}

template <class T>
std::vector<std::vector<T>> ghost_extend(const FieldState<T>& state,
                                         const Grid& grid, int width) {
  std::vector<std::vector<T>> out;
  for (const auto& c : state.components) {
    out.push_back(ghost_extend<T>(std::span<const T>(c), grid.boundary, width));
  }
  return out;
}

// sqrt(dx * sum_j (a_j - b_j)^2) per component, averaged over components.
double l2_error(const FieldState<double>& a, const FieldState<double>& b,
                const Grid& grid);

// Sum of u_j * dx for one component.
double total_mass(const FieldState<double>& state, int component,
                  const Grid& grid);

}  // namespace bptts

#endif  // BPTTS_GRID_H_
