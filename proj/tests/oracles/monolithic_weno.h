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

// Stand-alone WENO5-JS forward Euler step in textbook j+1/2 notation.
// Deliberately shares no code with the library: plain arrays, its own index
// arithmetic and its own Euler flux.

#ifndef BPTTS_TESTS_ORACLES_MONOLITHIC_WENO_H_
#define BPTTS_TESTS_ORACLES_MONOLITHIC_WENO_H_

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Problem {
  bool euler = false;
  bool periodic = true;
  double dx = 0.0;
  double dt = 0.0;
  double gamma = 1.4;
  double eps = 1e-6;
};

inline int wrap(int j, int n, bool periodic) {
  if (periodic) return ((j % n) + n) % n;
  return std::clamp(j, 0, n - 1);
}

// Left-biased fifth-order reconstruction at the right face of v[2] from
// v[0..4] (cells j-2..j+2).
inline double weno5(double a, double b, double c, double d, double e,
                    double eps) {
  const double q0 = a / 3.0 - 7.0 * b / 6.0 + 11.0 * c / 6.0;
  const double q1 = -b / 6.0 + 5.0 * c / 6.0 + d / 3.0;
  const double q2 = c / 3.0 + 5.0 * d / 6.0 - e / 6.0;
  const double s0 = 13.0 / 12.0 * (a - 2 * b + c) * (a - 2 * b + c) +
                    0.25 * (a - 4 * b + 3 * c) * (a - 4 * b + 3 * c);
  const double s1 = 13.0 / 12.0 * (b - 2 * c + d) * (b - 2 * c + d) +
                    0.25 * (b - d) * (b - d);
  const double s2 = 13.0 / 12.0 * (c - 2 * d + e) * (c - 2 * d + e) +
                    0.25 * (3 * c - 4 * d + e) * (3 * c - 4 * d + e);
  const double a0 = 0.1 / ((eps + s0) * (eps + s0));
  const double a1 = 0.6 / ((eps + s1) * (eps + s1));
  const double a2 = 0.3 / ((eps + s2) * (eps + s2));
  const double t = a0 + a1 + a2;
  return (a0 / t) * q0 + (a1 / t) * q1 + (a2 / t) * q2;
}

// q[c][j] conserved variables; returns the state after one step.
inline std::vector<std::vector<double>> step(
    const std::vector<std::vector<double>>& q, const Problem& pb) {
  const int nc = static_cast<int>(q.size());
  const int n = static_cast<int>(q[0].size());
  std::vector<std::vector<double>> f(nc, std::vector<double>(n));
  double alpha = 0.0;
  for (int j = 0; j < n; ++j) {
    if (!pb.euler) {
      f[0][j] = q[0][j] * q[0][j] / 2.0;
      alpha = std::max(alpha, std::fabs(q[0][j]));
    } else {
      const double r = q[0][j], m = q[1][j], en = q[2][j];
      const double v = m / r;
      const double p = (pb.gamma - 1.0) * (en - 0.5 * r * v * v);
      f[0][j] = m;
      f[1][j] = m * v + p;
      f[2][j] = v * (en + p);
      alpha = std::max(alpha, std::fabs(v) + std::sqrt(pb.gamma * p / r));
    }
  }
  auto out = q;
  for (int c = 0; c < nc; ++c) {
    auto fp = [&](int j) {
      const int k = wrap(j, n, pb.periodic);
      return 0.5 * (f[c][k] + alpha * q[c][k]);
    };
    auto fm = [&](int j) {
      const int k = wrap(j, n, pb.periodic);
      return 0.5 * (f[c][k] - alpha * q[c][k]);
    };
    // flux[j+1] is the face between cells j and j+1, j = -1..n-1.
    std::vector<double> flux(n + 1);
    for (int j = -1; j < n; ++j) {
      const double plus =
          weno5(fp(j - 2), fp(j - 1), fp(j), fp(j + 1), fp(j + 2), pb.eps);
      const double minus =
          weno5(fm(j + 3), fm(j + 2), fm(j + 1), fm(j), fm(j - 1), pb.eps);
      flux[j + 1] = plus + minus;
    }
    for (int j = 0; j < n; ++j) {
      out[c][j] = q[c][j] - pb.dt / pb.dx * (flux[j + 1] - flux[j]);
    }
  }
  return out;
}

}  // namespace oracle

#endif  // BPTTS_TESTS_ORACLES_MONOLITHIC_WENO_H_
