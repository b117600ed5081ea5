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

#include "bptts/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "bptts/error.h"

namespace bptts {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One step with the same arithmetic as rollout(): observe, optionally
// normalize, act, transition.
FieldState<double> advance(const FieldState<double>& u, const EnvSpec& env,
                           double dt, const PolicyParams* policy) {
  const auto obs = observe(u, env);
  std::vector<SubstencilWeights<double>> actions;
  if (policy == nullptr) {
    actions = weno_equivalent_policy(obs, env.weno);
  } else if (env.normalize_obs) {
    std::vector<StencilObservation<double>> agent;
    agent.reserve(obs.size());
    for (const auto& o : obs) agent.push_back(normalize_observation(o));
    actions = policy_forward(agent, *policy);
  } else {
    actions = policy_forward(obs, *policy);
  }
  return transition(u, obs, actions, env, dt);
}

// Runs `steps` steps and calls `visit(step, state)` for step 0..steps.
// Returns the step at which the state became inadmissible, if any.
std::optional<int> march(const FieldState<double>& initial, const EnvSpec& env,
                         double dt, int steps, const PolicyParams* policy,
                         const std::function<void(int,
                                                  const FieldState<double>&)>&
                             visit) {
  FieldState<double> u = initial;
  visit(0, u);
  for (int t = 0; t < steps; ++t) {
    try {
      u = advance(u, env, dt, policy);
      if (!is_admissible(u, env)) return t + 1;
    } catch (const DomainError&) {
      return t + 1;
    }
    visit(t + 1, u);
  }
  return std::nullopt;
}

void parallel_for(int count, int threads,
                  const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::future<void>> futs;
  for (int w = 0; w < workers; ++w) {
    futs.push_back(std::async(std::launch::async, [&] {
      for (int i = next++; i < count; i = next++) body(i);
    }));
  }
  for (auto& f : futs) f.get();
}

std::string_view family_name(RandomFamily f) {
  switch (f) {
    case RandomFamily::kSine:
      return "random_sine";
    case RandomFamily::kShock:
      return "random_shock";
    case RandomFamily::kRarefaction:
      return "random_rarefaction";
  }
  return "?";
}

std::ostream& num(std::ostream& os, double x) {
  if (std::isnan(x)) return os << "nan";
  return os << x;
}

std::ostream& triple(std::ostream& os, const Triple<double>& t) {
  return os << t[0] << ',' << t[1] << ',' << t[2];
}

}  // namespace

Timeline evaluation_timeline(const ICSpec& ic, int n, double t_end,
                             double cfl) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw ConfigError("evaluation: t_end must be positive");
  }
  if (!(cfl > 0.0)) throw ConfigError("evaluation: cfl must be positive");
  const EnvSpec env = make_env(ic, n, DtMode::fixed(1.0), 1);
  const double alpha = max_wavespeed(ic.initial_state(n), env);
  const double k = std::ceil(t_end * alpha / (cfl * env.grid.dx()));
  Timeline tl;
  tl.steps = std::max(1, static_cast<int>(k));
  tl.dt = t_end / tl.steps;
  return tl;
}

EnvSpec evaluation_env(const ICSpec& ic, int n, const Timeline& tl,
                       const EvalSettings& s) {
  EnvSpec env = make_env(ic, n, DtMode::fixed(tl.dt), tl.steps);
  env.weno = s.weno;
  env.normalize_obs = s.normalize_obs;
  return env;
}

FieldState<double> cell_average_down(const FieldState<double>& fine,
                                     int factor) {
  if (factor < 1 || fine.size() % factor != 0) {
    throw ConfigError("cell_average_down: size not divisible by factor");
  }
  FieldState<double> out;
  out.time = fine.time;
  const int n = fine.size() / factor;
  for (const auto& c : fine.components) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < factor; ++k) acc += c[j * factor + k];
      v[j] = acc / factor;
    }
    out.components.push_back(std::move(v));
  }
  return out;
}

Reference reference_trajectory(const ICSpec& ic, const EnvSpec& coarse,
                               int factor, bool keep_all) {
  if (coarse.dt.kind != DtMode::Kind::kFixed) {
    throw ConfigError("reference: coarse environment needs a fixed dt");
  }
  if (factor < 1) throw ConfigError("reference: factor must be >= 1");
  EnvSpec fine = coarse;
  fine.grid = ic.grid(coarse.grid.n * factor);
  fine.dt = DtMode::fixed(coarse.dt.value / factor);
  fine.steps = coarse.steps * factor;
  Reference ref;
  ref.factor = factor;
  ref.blowup_step = march(
      ic.initial_state(fine.grid.n), fine, fine.dt.value, fine.steps, nullptr,
      [&](int step, const FieldState<double>& u) {
        if (step % factor != 0) return;
        if (!keep_all && step != fine.steps) return;
        FieldState<double> c = cell_average_down(u, factor);
        c.time = (step / factor) * coarse.dt.value;
        ref.states.push_back(std::move(c));
      });
  if (ref.blowup_step) {
    throw BlowupError(*ref.blowup_step,
                      "reference solution for '" + ic.name + "' blew up");
  }
  return ref;
}

RunErrors final_errors(const PolicyParams* policy, const ICSpec& ic, int n,
                       double t_end, const EvalSettings& s) {
  const Timeline tl = evaluation_timeline(ic, n, t_end, s.cfl);
  const EnvSpec env = evaluation_env(ic, n, tl, s);
  const Reference ref = reference_trajectory(ic, env, s.reference_factor,
                                             /*keep_all=*/false);
  const FieldState<double>& truth = ref.states.back();
  const FieldState<double> u0 = ic.initial_state(n);

  auto score = [&](const PolicyParams* p, double& err, bool& diverged) {
    FieldState<double> last;
    const auto blow = march(u0, env, tl.dt, tl.steps, p,
                            [&](int step, const FieldState<double>& u) {
                              if (step == tl.steps) last = u;
                            });
    diverged = blow.has_value();
    err = diverged ? kNaN : l2_error(last, truth, env.grid);
  };
  RunErrors e;
  score(nullptr, e.weno_error, e.weno_diverged);
  if (policy == nullptr) {
    e.rl_error = e.weno_error;
    e.rl_diverged = e.weno_diverged;
  } else {
    score(policy, e.rl_error, e.rl_diverged);
  }
  return e;
}

std::vector<TableRow> error_table(const PolicyParams* policy,
                                  std::span<const std::string> ics,
                                  std::span<const int> grids,
                                  const EvalSettings& s) {
  std::vector<TableRow> rows;
  for (const std::string& name : ics) {
    for (int n : grids) rows.push_back({name, n, {}});
  }
  parallel_for(static_cast<int>(rows.size()), s.threads, [&](int i) {
    const ICSpec ic = make_ic(rows[i].ic);
    rows[i].errors = final_errors(policy, ic, rows[i].n, ic.t_max, s);
  });
  return rows;
}

std::vector<SeriesRow> error_series(const PolicyParams* policy,
                                    const ICSpec& ic, int n, double t_end,
                                    const EvalSettings& s) {
  const Timeline tl = evaluation_timeline(ic, n, t_end, s.cfl);
  const EnvSpec env = evaluation_env(ic, n, tl, s);
  const Reference ref = reference_trajectory(ic, env, s.reference_factor);
  std::vector<SeriesRow> rows(tl.steps + 1);
  for (int t = 0; t <= tl.steps; ++t) {
    rows[t].step = t;
    rows[t].t = t * tl.dt;
    rows[t].rl_error = kNaN;
    rows[t].weno_error = kNaN;
  }
  const FieldState<double> u0 = ic.initial_state(n);
  march(u0, env, tl.dt, tl.steps, nullptr,
        [&](int t, const FieldState<double>& u) {
          rows[t].weno_error = l2_error(u, ref.states[t], env.grid);
        });
  if (policy == nullptr) {
    for (auto& r : rows) r.rl_error = r.weno_error;
  } else {
    march(u0, env, tl.dt, tl.steps, policy,
          [&](int t, const FieldState<double>& u) {
            rows[t].rl_error = l2_error(u, ref.states[t], env.grid);
          });
  }
  return rows;
}

std::vector<SuiteRow> random_suite(const PolicyParams* policy, int count,
                                   std::uint64_t seed, double t_end,
                                   const EvalSettings& s) {
  if (count < 0) throw ConfigError("random suite: count must be >= 0");
  std::vector<SuiteRow> rows(count);
  std::vector<ICSpec> ics(count);
  for (int i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    const auto fam = static_cast<RandomFamily>(i % 3);
    const RandomEnv env = sample_random_env(fam, rng);
    rows[i].index = i;
    rows[i].family = family_name(fam);
    rows[i].n = env.n;
    rows[i].constants = env.ic.constants;
    ics[i] = env.ic;
  }
  parallel_for(count, s.threads, [&](int i) {
    const double te = t_end > 0.0 ? t_end : ics[i].t_max;
    try {
      rows[i].errors = final_errors(policy, ics[i], rows[i].n, te, s);
    } catch (const BlowupError&) {
      rows[i].errors = {kNaN, kNaN, true, true};
    }
  });
  return rows;
}

std::vector<ActionRow> action_dump(const PolicyParams& policy,
                                   const ICSpec& ic, int n, double t_end,
                                   int t_query, const EvalSettings& s) {
  const Timeline tl = evaluation_timeline(ic, n, t_end, s.cfl);
  if (t_query < 0 || t_query >= tl.steps) {
    std::ostringstream os;
    os << "actions: t_query " << t_query << " outside [0, " << tl.steps - 1
       << "]";
    throw ConfigError(os.str());
  }
  const EnvSpec env = evaluation_env(ic, n, tl, s);
  FieldState<double> at;
  const auto blow = march(ic.initial_state(n), env, tl.dt, t_query, &policy,
                          [&](int t, const FieldState<double>& u) {
                            if (t == t_query) at = u;
                          });
  if (blow) {
    throw BlowupError(*blow, "policy rollout blew up before the query step");
  }
  const auto obs = observe(at, env);
  const auto weno = weno_equivalent_policy(obs, env.weno);
  std::vector<StencilObservation<double>> agent = obs;
  if (env.normalize_obs) {
    for (auto& o : agent) o = normalize_observation(o);
  }
  const auto rl = policy_forward(agent, policy);
  std::vector<ActionRow> rows;
  const int ni = n + 1;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    ActionRow r;
    r.component = static_cast<int>(k) / ni;
    r.interface = static_cast<int>(k) % ni;
    r.x = env.grid.x_min + r.interface * env.grid.dx();
    r.rl_plus = rl[k].plus;
    r.rl_minus = rl[k].minus;
    r.weno_plus = weno[k].plus;
    r.weno_minus = weno[k].minus;
    rows.push_back(r);
  }
  return rows;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ConfigError("spearman: need two equal-length samples of size >= 2");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

std::string format_table_csv(std::span<const TableRow> rows) {
  std::ostringstream os;
  os << std::setprecision(17)
     << "ic,n,rl_error,weno_error,rl_diverged,weno_diverged\n";
  for (const auto& r : rows) {
    os << r.ic << ',' << r.n << ',';
    num(os, r.errors.rl_error) << ',';
    num(os, r.errors.weno_error) << ',' << r.errors.rl_diverged << ','
                                 << r.errors.weno_diverged << '\n';
  }
  return os.str();
}

std::string format_table_wide_csv(std::span<const TableRow> rows) {
  std::vector<std::string> ics;
  std::vector<int> grids;
  for (const auto& r : rows) {
    if (std::find(ics.begin(), ics.end(), r.ic) == ics.end()) {
      ics.push_back(r.ic);
    }
    if (std::find(grids.begin(), grids.end(), r.n) == grids.end()) {
      grids.push_back(r.n);
    }
  }
  std::ostringstream os;
  os << std::setprecision(17) << "n";
  for (const auto& ic : ics) os << ',' << ic << "_rl," << ic << "_weno";
  os << '\n';
  for (int n : grids) {
    os << n;
    for (const auto& ic : ics) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) {
        return r.ic == ic && r.n == n;
      });
      os << ',';
      if (it == rows.end()) {
        os << ',';
        continue;
      }
      num(os, it->errors.rl_error) << ',';
      num(os, it->errors.weno_error);
    }
    os << '\n';
  }
  return os.str();
}

std::string format_series_csv(std::span<const SeriesRow> rows) {
  std::ostringstream os;
  os << std::setprecision(17) << "step,t,rl_error,weno_error\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.t << ',';
    num(os, r.rl_error) << ',';
    num(os, r.weno_error) << '\n';
  }
  return os.str();
}

std::string format_suite_csv(std::span<const SuiteRow> rows) {
  std::ostringstream os;
  os << std::setprecision(17)
     << "index,family,n,a,b,c,k,phi,rl_error,weno_error,rl_diverged,"
        "weno_diverged\n";
  for (const auto& r : rows) {
    os << r.index << ',' << r.family << ',' << r.n;
    for (double c : r.constants) os << ',' << c;
    os << ',';
    num(os, r.errors.rl_error) << ',';
    num(os, r.errors.weno_error) << ',' << r.errors.rl_diverged << ','
                                 << r.errors.weno_diverged << '\n';
  }
  return os.str();
}

std::string format_actions_csv(std::span<const ActionRow> rows) {
  std::ostringstream os;
  os << std::setprecision(17)
     << "component,interface,x,rl_plus0,rl_plus1,rl_plus2,rl_minus0,"
        "rl_minus1,rl_minus2,weno_plus0,weno_plus1,weno_plus2,weno_minus0,"
        "weno_minus1,weno_minus2\n";
  for (const auto& r : rows) {
    os << r.component << ',' << r.interface << ',' << r.x << ',';
    triple(os, r.rl_plus) << ',';
    triple(os, r.rl_minus) << ',';
    triple(os, r.weno_plus) << ',';
    triple(os, r.weno_minus) << '\n';
  }
  return os.str();
}

}  // namespace bptts
