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

// The multi-agent simulation environment. One agent sits at every cell
// interface (N+1 of them, times three components for Euler). Interface i
// separates cells i-1 and i; interfaces 0 and N are the domain edges.
//
// Observations, transitions and rewards are templates over the scalar type
// so an episode can be recorded on a tape or run on plain doubles with
// identical arithmetic.

#ifndef BPTTS_ENVIRONMENT_H_
#define BPTTS_ENVIRONMENT_H_

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "bptts/autodiff.h"
#include "bptts/euler.h"
#include "bptts/grid.h"
#include "bptts/weno.h"

namespace bptts {

enum class System { kBurgers, kEuler };

std::string_view to_string(System s);
System parse_system(std::string_view name);

struct DtMode {
  enum class Kind { kFixed, kCfl };
  Kind kind = Kind::kFixed;
  double value = 4e-4;  // seconds (fixed) or Courant number (cfl)

  static DtMode fixed(double dt) { return {Kind::kFixed, dt}; }
  static DtMode cfl(double c) { return {Kind::kCfl, c}; }
};

struct EnvSpec {
  System system = System::kBurgers;
  Grid grid;
  double gamma = euler::kGamma;
  DtMode dt;
  int steps = 250;
  WenoConstants weno;
  bool normalize_obs = true;
  bool stop_gradient_anchor = false;

  int num_components() const { return system == System::kEuler ? 3 : 1; }
  int num_interfaces() const { return grid.n + 1; }
  int num_agents() const { return num_components() * num_interfaces(); }
  void validate() const;
};

inline constexpr int kGhostWidth = 3;

// Finite values everywhere, and positive density and pressure for Euler.
bool is_admissible(const FieldState<double>& state, const EnvSpec& spec);

// Throws BlowupError(step) if `state` is not admissible.
void check_admissible(const FieldState<double>& state, const EnvSpec& spec,
                      int step);

template <class S>
FieldState<double> values_of(const FieldState<S>& s) {
  FieldState<double> out;
  out.time = s.time;
  for (const auto& c : s.components) {
    std::vector<double> v;
    v.reserve(c.size());
    for (const S& x : c) v.push_back(ad::value_of(x));
    out.components.push_back(std::move(v));
  }
  return out;
}

// Leaves of `tape` holding the values of `state` (no gradient path).
FieldState<ad::Var> detach(const FieldState<double>& state, ad::Tape& tape);

// Lax-Friedrichs coefficient: max |u| (Burgers) or max |u| + c (Euler).
template <class S>
S max_wavespeed(const FieldState<S>& state, const EnvSpec& spec) {
  const int n = state.size();
  if (spec.system == System::kBurgers) {
    const auto& u = state.components[0];
    S a = ad::abs(u[0]);
    for (int j = 1; j < n; ++j) a = ad::max(a, ad::abs(u[j]));
    return a;
  }
  const auto& rho = state.components[0];
  const auto& mom = state.components[1];
  const auto& en = state.components[2];
  S a{};
  for (int j = 0; j < n; ++j) {
    if (!(ad::value_of(rho[j]) > 0.0)) {
      throw DomainError("nonpositive density");
    }
    const S p = euler::pressure(rho[j], mom[j], en[j], spec.gamma);
    if (!(ad::value_of(p) > 0.0)) throw DomainError("nonpositive pressure");
    const S s = ad::abs(mom[j] / rho[j]) +
                euler::sound_speed(rho[j], p, spec.gamma);
    a = j == 0 ? s : ad::max(a, s);
  }
  return a;
}

// Physical flux of every component at every cell.
template <class S>
std::vector<std::vector<S>> physical_flux(const FieldState<S>& state,
                                          const EnvSpec& spec) {
  const int n = state.size();
  if (spec.system == System::kBurgers) {
    std::vector<S> f;
    f.reserve(n);
    for (const S& u : state.components[0]) f.push_back(0.5 * ad::square(u));
    return {std::move(f)};
  }
  std::vector<std::vector<S>> f(3);
  for (auto& c : f) c.reserve(n);
  for (int j = 0; j < n; ++j) {
    const auto fj = euler::flux(state.components[0][j],
                                state.components[1][j],
                                state.components[2][j], spec.gamma);
    for (int c = 0; c < 3; ++c) f[c].push_back(fj[c]);
  }
  return f;
}

// Raw (unnormalized) split-flux stencils, ordered component-major:
// entry c * (N+1) + i is component c at interface i.
template <class S>
std::vector<StencilObservation<S>> observe(const FieldState<S>& state,
                                           const EnvSpec& spec) {
  const int n = state.size();
  if (n != spec.grid.n || state.num_components() != spec.num_components()) {
    throw ConfigError("observe: state does not match environment");
  }
  const S alpha = max_wavespeed(state, spec);
  const auto flux = physical_flux(state, spec);
  std::vector<StencilObservation<S>> obs;
  obs.reserve(static_cast<std::size_t>(spec.num_agents()));
  for (int c = 0; c < state.num_components(); ++c) {
    std::vector<S> fp, fm;
    fp.reserve(n);
    fm.reserve(n);
    for (int j = 0; j < n; ++j) {
      auto [p, m] = lax_friedrichs_split(flux[c][j], state.components[c][j],
                                         alpha);
      fp.push_back(p);
      fm.push_back(m);
    }
    const auto gp = ghost_extend<S>(std::span<const S>(fp),
                                    spec.grid.boundary, kGhostWidth);
    const auto gm = ghost_extend<S>(std::span<const S>(fm),
                                    spec.grid.boundary, kGhostWidth);
    // Cell k lives at ghost index k + 3.
    for (int i = 0; i <= n; ++i) {
      StencilObservation<S> o;
      for (int k = 0; k < 5; ++k) {
        o.plus[k] = gp[i + k];
        o.minus[k] = gm[i + 5 - k];
      }
      obs.push_back(o);
    }
  }
  return obs;
}

// Divides each 5-point stencil by its largest absolute entry; stencils that
// are identically zero pass through unchanged.
template <class S>
Stencil<S> normalize_stencil(const Stencil<S>& s) {
  S m = ad::abs(s[0]);
  for (int k = 1; k < 5; ++k) m = ad::max(m, ad::abs(s[k]));
  if (ad::value_of(m) == 0.0) return s;
  Stencil<S> out;
  for (int k = 0; k < 5; ++k) out[k] = s[k] / m;
  return out;
}

template <class S>
StencilObservation<S> normalize_observation(const StencilObservation<S>& o) {
  return {normalize_stencil(o.plus), normalize_stencil(o.minus)};
}

// The action the standard WENO scheme would take (always on raw stencils).
template <class S>
SubstencilWeights<S> weno_equivalent_policy(const StencilObservation<S>& o,
                                            const WenoConstants& k) {
  return {standard_weno_weights(smoothness_indicators(o.plus), k),
          standard_weno_weights(smoothness_indicators(o.minus), k)};
}

template <class S>
std::vector<SubstencilWeights<S>> weno_equivalent_policy(
    const std::vector<StencilObservation<S>>& obs, const WenoConstants& k) {
  std::vector<SubstencilWeights<S>> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(weno_equivalent_policy(o, k));
  return out;
}

// One forward-Euler step u + dt * rhs using the given raw observations of
// `state` and one action per observation.
template <class S>
FieldState<S> transition(const FieldState<S>& state,
                         const std::vector<StencilObservation<S>>& obs,
                         const std::vector<SubstencilWeights<S>>& actions,
                         const EnvSpec& spec, double dt) {
  const int n = state.size();
  const int ni = n + 1;
  if (obs.size() != actions.size() ||
      static_cast<int>(obs.size()) != ni * state.num_components()) {
    throw ConfigError("transition: one action per interface and component");
  }
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw ConfigError("transition: dt must be finite and >= 0");
  }
  FieldState<S> next;
  next.time = state.time + dt;
  next.components.resize(state.components.size());
  std::vector<S> fluxes(ni);
  for (int c = 0; c < state.num_components(); ++c) {
    for (int i = 0; i < ni; ++i) {
      fluxes[i] = weighted_interface_flux(obs[c * ni + i], actions[c * ni + i]);
    }
    const auto rhs =
        spatial_rhs<S>(std::span<const S>(fluxes), spec.grid.dx(), n);
    auto& out = next.components[c];
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
      out.push_back(state.components[c][j] + dt * rhs[j]);
    }
  }
  return next;
}

template <class S>
FieldState<S> transition(const FieldState<S>& state,
                         const std::vector<SubstencilWeights<S>>& actions,
                         const EnvSpec& spec, double dt) {
  return transition(state, observe(state, spec), actions, spec, dt);
}

// w^{t+1}: one WENO step taken from the agent's current state.
template <class S>
FieldState<S> markovian_anchor(const FieldState<S>& state,
                               const std::vector<StencilObservation<S>>& obs,
                               const EnvSpec& spec, double dt) {
  return transition(state, obs, weno_equivalent_policy(obs, spec.weno), spec,
                    dt);
}

// Per-interface reward -(|d_{i-1}| + |d_i|) / 2 with d = u_next - anchor.
// Edge interfaces use their single adjacent cell. Euler rewards are the
// mean over the three components.
template <class S, class A>
std::vector<S> interface_rewards(const FieldState<S>& u_next,
                                 const FieldState<A>& anchor) {
  const int n = u_next.size();
  if (anchor.size() != n ||
      anchor.num_components() != u_next.num_components()) {
    throw ConfigError("reward: anchor shape mismatch");
  }
  const int nc = u_next.num_components();
  std::vector<std::vector<S>> per_comp(nc);
  for (int c = 0; c < nc; ++c) {
    std::vector<S> d;
    d.reserve(n);
    for (int j = 0; j < n; ++j) {
      d.push_back(ad::abs(u_next.components[c][j] - anchor.components[c][j]));
    }
    auto& r = per_comp[c];
    r.reserve(n + 1);
    r.push_back(-(0.5 * d[0]));
    for (int i = 1; i < n; ++i) r.push_back(-(0.5 * (d[i - 1] + d[i])));
    r.push_back(-(0.5 * d[n - 1]));
  }
  if (nc == 1) return std::move(per_comp[0]);
  std::vector<S> r;
  r.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    S acc = per_comp[0][i];
    for (int c = 1; c < nc; ++c) acc = acc + per_comp[c][i];
    r.push_back(acc / static_cast<double>(nc));
  }
  return r;
}

// Markovian reward for the step u_t -> u_next.
template <class S>
std::vector<S> reward_markovian(const FieldState<S>& u_t,
                                const FieldState<S>& u_next,
                                const EnvSpec& spec, double dt) {
  if (u_next.time != u_t.time + dt) {
    throw ConfigError("reward_markovian: dt differs between branches");
  }
  const auto anchor = markovian_anchor(u_t, observe(u_t, spec), spec, dt);
  return interface_rewards(u_next, anchor);
}

// Reward against a precomputed trajectory state w_{t+1}.
template <class S>
std::vector<S> reward_fixed(const FieldState<S>& u_next,
                            const FieldState<double>& w_fixed_next) {
  return interface_rewards(u_next, w_fixed_next);
}

// Fixed dt, or C * dx / max(alpha, 1e-12) in CFL mode.
double compute_dt(const FieldState<double>& state, const EnvSpec& spec);

}  // namespace bptts

#endif  // BPTTS_ENVIRONMENT_H_
