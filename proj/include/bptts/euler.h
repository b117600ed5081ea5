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

// Gamma-law gas relations for the 1-D Euler equations.
// Conserved variables are (rho, rho*u, rho*E) with E = e + u^2/2 and
// p = rho * e * (gamma - 1).

#ifndef BPTTS_EULER_H_
#define BPTTS_EULER_H_

#include <array>

#include "bptts/autodiff.h"
#include "bptts/error.h"

namespace bptts::euler {

inline constexpr double kGamma = 1.4;

struct Primitive {
  double rho;
  double u;
  double p;
};

inline std::array<double, 3> to_conserved(const Primitive& w,
                                          double gamma = kGamma) {
  if (!(w.rho > 0.0)) throw DomainError("density must be positive");
  if (!(w.p > 0.0)) throw DomainError("pressure must be positive");
  const double e = w.p / (w.rho * (gamma - 1.0));
  return {w.rho, w.rho * w.u, w.rho * (e + 0.5 * w.u * w.u)};
}

inline Primitive to_primitive(const std::array<double, 3>& q,
                              double gamma = kGamma) {
  if (!(q[0] > 0.0)) throw DomainError("density must be positive");
  const double u = q[1] / q[0];
  const double e = q[2] / q[0] - 0.5 * u * u;
  const double p = q[0] * e * (gamma - 1.0);
  if (!(p > 0.0)) throw DomainError("pressure must be positive");
  return {q[0], u, p};
}

template <class S>
S velocity(const S& rho, const S& mom) {
  return mom / rho;
}

template <class S>
S pressure(const S& rho, const S& mom, const S& energy,
           double gamma = kGamma) {
  const S u = mom / rho;
  return (gamma - 1.0) * (energy - 0.5 * (mom * u));
}

template <class S>
S sound_speed(const S& rho, const S& p, double gamma = kGamma) {
  return ad::sqrt(gamma * p / rho);
}

// F(U) = (rho u, rho u u + p, u (rho E + p)).
template <class S>
std::array<S, 3> flux(const S& rho, const S& mom, const S& energy,
                      double gamma = kGamma) {
  const S u = mom / rho;
  const S p = (gamma - 1.0) * (energy - 0.5 * (mom * u));
  return {mom, mom * u + p, u * (energy + p)};
}

}  // namespace bptts::euler

#endif  // BPTTS_EULER_H_
