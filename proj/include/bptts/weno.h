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

// Fifth-order WENO building blocks (three 3-point sub-stencils inside a
// 5-point stencil) with Lax-Friedrichs flux splitting.
//
// Every routine is templated on the scalar type so the same code runs on
// plain doubles and on tape variables (ad::Var).
//
// Stencil convention: for the interface between cells i-1 and i, the plus
// stencil holds f+ at cells (i-3, i-2, i-1, i, i+1) and the minus stencil
// holds f- at cells (i+2, i+1, i, i-1, i-2), i.e. mirrored, so both signs
// reconstruct with the same formulas.

#ifndef BPTTS_WENO_H_
#define BPTTS_WENO_H_

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "bptts/autodiff.h"
#include "bptts/error.h"

namespace bptts {

template <class S>
using Stencil = std::array<S, 5>;

template <class S>
using Triple = std::array<S, 3>;

// The per-interface observation: split-flux stencils for both signs.
template <class S>
struct SplitFluxStencils {
  Stencil<S> plus;
  Stencil<S> minus;
};

template <class S>
using StencilObservation = SplitFluxStencils<S>;

// Convex sub-stencil weights for both flux signs (the agent's action).
template <class S>
struct SubstencilWeights {
  Triple<S> plus;
  Triple<S> minus;
};

struct WenoConstants {
  static constexpr Triple<double> kOptimal{0.1, 0.6, 0.3};
  double epsilon = 1e-6;
  int p = 2;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("WENO epsilon must be > 0");
    if (p < 1) throw ConfigError("WENO exponent p must be >= 1");
  }
};

template <class S>
std::pair<S, S> lax_friedrichs_split(const S& f, const S& u, const S& alpha) {
  const S au = alpha * u;
  return {0.5 * (f + au), 0.5 * (f - au)};
}

template <class S>
Triple<S> smoothness_indicators(const Stencil<S>& s) {
  constexpr double c = 13.0 / 12.0;
  const S b0 = c * ad::square(s[0] - 2.0 * s[1] + s[2]) +
               0.25 * ad::square(s[0] - 4.0 * s[1] + 3.0 * s[2]);
  const S b1 = c * ad::square(s[1] - 2.0 * s[2] + s[3]) +
               0.25 * ad::square(s[1] - s[3]);
  const S b2 = c * ad::square(s[2] - 2.0 * s[3] + s[4]) +
               0.25 * ad::square(3.0 * s[2] - 4.0 * s[3] + s[4]);
  return {b0, b1, b2};
}

template <class S>
Triple<S> substencil_reconstruct(const Stencil<S>& s) {
  return {(2.0 * s[0] - 7.0 * s[1] + 11.0 * s[2]) / 6.0,
          (-1.0 * s[1] + 5.0 * s[2] + 2.0 * s[3]) / 6.0,
          (2.0 * s[2] + 5.0 * s[3] - 1.0 * s[4]) / 6.0};
}

template <class S>
Triple<S> standard_weno_weights(const Triple<S>& beta,
                                const WenoConstants& k) {
  Triple<S> alpha;
  for (int i = 0; i < 3; ++i) {
    const S base = beta[i] + k.epsilon;
    S denom = k.p == 2 ? ad::square(base) : base;
    if (k.p != 2) {
      for (int e = 1; e < k.p; ++e) denom = denom * base;
    }
    alpha[i] = WenoConstants::kOptimal[i] / denom;
  }
  const S total = alpha[0] + alpha[1] + alpha[2];
  return {alpha[0] / total, alpha[1] / total, alpha[2] / total};
}

// sum_k w_k * fhat_k for one sign.
template <class S>
S weighted_reconstruction(const Stencil<S>& s, const Triple<S>& w) {
  const Triple<S> fhat = substencil_reconstruct(s);
  return w[0] * fhat[0] + w[1] * fhat[1] + w[2] * fhat[2];
}

template <class S>
S weighted_interface_flux(const SplitFluxStencils<S>& stencils,
                          const SubstencilWeights<S>& weights) {
  return weighted_reconstruction(stencils.plus, weights.plus) +
         weighted_reconstruction(stencils.minus, weights.minus);
}

// -(F[j+1] - F[j]) / dx for j = 0..N-1, given N+1 interface fluxes.
template <class S>
std::vector<S> spatial_rhs(std::span<const S> fluxes, double dx) {
  if (fluxes.size() < 2) throw ConfigError("spatial_rhs needs N+1 >= 2 fluxes");
  std::vector<S> rhs;
  rhs.reserve(fluxes.size() - 1);
  for (std::size_t j = 0; j + 1 < fluxes.size(); ++j) {
    rhs.push_back(-((fluxes[j + 1] - fluxes[j]) / dx));
  }
  return rhs;
}

template <class S>
std::vector<S> spatial_rhs(std::span<const S> fluxes, double dx,
                           std::size_t expected_cells) {
  if (fluxes.size() != expected_cells + 1) {
    throw ConfigError("spatial_rhs: expected N+1 interface fluxes");
  }
  return spatial_rhs(fluxes, dx);
}

// True when each triple is nonnegative and sums to one within `tol`.
template <class S>
bool is_convex(const SubstencilWeights<S>& w, double tol = 1e-12) {
  for (const auto* t : {&w.plus, &w.minus}) {
    double s = 0.0;
    for (const S& x : *t) {
      if (!(ad::value_of(x) >= -tol)) return false;
      s += ad::value_of(x);
    }
    if (!(std::abs(s - 1.0) <= tol)) return false;
  }
  return true;
}

}  // namespace bptts

#endif  // BPTTS_WENO_H_
