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

// Python bindings: plain functions over numpy arrays and config text.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "bptts/config.h"
#include "bptts/environment.h"
#include "bptts/error.h"
#include "bptts/evaluation.h"
#include "bptts/gradcheck.h"
#include "bptts/initial_conditions.h"
#include "bptts/policy.h"
#include "bptts/trainer.h"

namespace py = pybind11;
using namespace bptts;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const FieldState<double>& s) {
  Array out({s.num_components(), s.size()});
  auto m = out.mutable_unchecked<2>();
  for (int c = 0; c < s.num_components(); ++c) {
    for (int j = 0; j < s.size(); ++j) m(c, j) = s.components[c][j];
  }
  return out;
}

FieldState<double> from_array(const Array& a, double time = 0.0) {
  if (a.ndim() != 2) throw ConfigError("state must be a 2-D array (C, N)");
  auto r = a.unchecked<2>();
  FieldState<double> s;
  s.time = time;
  s.components.assign(r.shape(0), std::vector<double>(r.shape(1)));
  for (py::ssize_t c = 0; c < r.shape(0); ++c) {
    for (py::ssize_t j = 0; j < r.shape(1); ++j) s.components[c][j] = r(c, j);
  }
  return s;
}

Array params_array(const PolicyParams& p) {
  Array out(static_cast<py::ssize_t>(p.values.size()));
  std::copy(p.values.begin(), p.values.end(), out.mutable_data());
  return out;
}

PolicyParams to_params(const Array& a) {
  if (a.ndim() != 1 || a.size() != static_cast<py::ssize_t>(PolicyParams::kCount)) {
    throw ConfigError("policy parameters must be a vector of length " +
                      std::to_string(PolicyParams::kCount));
  }
  PolicyParams p;
  std::copy(a.data(), a.data() + a.size(), p.values.begin());
  return p;
}

std::optional<PolicyParams> maybe_params(const std::optional<Array>& a) {
  if (!a) return std::nullopt;
  return to_params(*a);
}

Episode episode(const std::string& ic_name, int n, int steps, double dt,
                const std::string& reward, bool normalize_obs) {
  const ICSpec ic = make_ic(ic_name);
  EnvSpec env = make_env(ic, n, DtMode::fixed(dt), steps);
  env.normalize_obs = normalize_obs;
  return make_episode(ic, env, parse_reward(reward));
}

py::dict rollout_dict(const RolloutResult& r) {
  py::dict d;
  py::list states;
  for (const auto& s : r.states) states.append(to_array(s));
  d["states"] = states;
  d["rewards"] = r.rewards;
  d["total_reward"] = r.total_reward;
  d["blowup_step"] = r.blowup_step;
  return d;
}

py::dict errors_dict(const RunErrors& e) {
  py::dict d;
  d["rl_error"] = e.rl_error;
  d["weno_error"] = e.weno_error;
  d["rl_diverged"] = e.rl_diverged;
  d["weno_diverged"] = e.weno_diverged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "WENO sub-stencil weight learning by backpropagation through "
            "time and space";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<BlowupError>(m, "BlowupError", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError",
                                         PyExc_RuntimeError);

  m.attr("NUM_PARAMS") = PolicyParams::kCount;

  m.def("burgers_ic_names", &burgers_ic_names);
  m.def("euler_ic_names", &euler_ic_names);
  m.def(
      "initial_state",
      [](const std::string& name, int n) {
        return to_array(make_ic(name).initial_state(n));
      },
      py::arg("ic"), py::arg("n"), "Conserved variables (C, N) at t = 0.");
  m.def(
      "cell_centers",
      [](const std::string& name, int n) { return make_ic(name).grid(n).cell_centers(); },
      py::arg("ic"), py::arg("n"));

  m.def(
      "weno_step",
      [](const Array& state, const std::string& ic_name, double dt) {
        const FieldState<double> s = from_array(state);
        const ICSpec ic = make_ic(ic_name);
        const EnvSpec env = make_env(ic, s.size(), DtMode::fixed(dt), 1);
        const auto obs = observe(s, env);
        return to_array(
            transition(s, obs, weno_equivalent_policy(obs, env.weno), env, dt));
      },
      py::arg("state"), py::arg("ic"), py::arg("dt"),
      "One forward Euler step with the standard WENO weights, on the grid "
      "and boundary of the named IC.");

  m.def(
      "init_params",
      [](std::uint64_t seed, bool zero_head) {
        return params_array(
            init_params(seed, zero_head ? HeadInit::kZero : HeadInit::kRandom));
      },
      py::arg("seed") = 0, py::arg("zero_head") = true);
  m.def(
      "random_params",
      [](std::uint64_t seed) { return params_array(random_params(seed)); },
      py::arg("seed"));
  m.def(
      "policy_forward",
      [](const Array& obs, const Array& params) {
        if (obs.ndim() != 2 || obs.shape(1) != 10) {
          throw ConfigError("observations must have shape (B, 10)");
        }
        auto r = obs.unchecked<2>();
        std::vector<StencilObservation<double>> o(r.shape(0));
        for (py::ssize_t b = 0; b < r.shape(0); ++b) {
          for (int k = 0; k < 5; ++k) {
            o[b].plus[k] = r(b, k);
            o[b].minus[k] = r(b, 5 + k);
          }
        }
        const auto w = policy_forward(o, to_params(params));
        Array out({r.shape(0), py::ssize_t{6}});
        auto mo = out.mutable_unchecked<2>();
        for (py::ssize_t b = 0; b < r.shape(0); ++b) {
          for (int k = 0; k < 3; ++k) {
            mo(b, k) = w[b].plus[k];
            mo(b, 3 + k) = w[b].minus[k];
          }
        }
        return out;
      },
      py::arg("obs"), py::arg("params"),
      "Rows (plus[5], minus[5]) to weights (w_plus[3], w_minus[3]).");
  m.def(
      "save_params",
      [](const std::string& path, const Array& p) { save_params(path, to_params(p)); },
      py::arg("path"), py::arg("params"));
  m.def(
      "load_params",
      [](const std::string& path) { return params_array(load_params(path)); },
      py::arg("path"));

  m.def(
      "rollout",
      [](const std::string& ic, int n, int steps, double dt,
         const std::optional<Array>& params, const std::string& reward,
         bool normalize_obs) {
        const Episode ep = episode(ic, n, steps, dt, reward, normalize_obs);
        const auto p = maybe_params(params);
        RolloutResult r;
        {
          py::gil_scoped_release release;
          r = rollout(ep, p ? &*p : nullptr);
        }
        return rollout_dict(r);
      },
      py::arg("ic"), py::arg("n"), py::arg("steps"), py::arg("dt"),
      py::arg("params") = py::none(), py::arg("reward") = "markovian",
      py::arg("normalize_obs") = true,
      "Episode under a policy (None: standard WENO weights).");

  m.def(
      "episode_gradient",
      [](const std::string& ic, int n, int steps, double dt, const Array& params,
         const std::string& reward, bool normalize_obs) {
        const Episode ep = episode(ic, n, steps, dt, reward, normalize_obs);
        const PolicyParams p = to_params(params);
        std::vector<double> g;
        double objective = 0.0;
        {
          py::gil_scoped_release release;
          const RecordedRollout rec = record_rollout(ep, p);
          g = episode_gradient(rec);
          objective = rec.result.total_reward;
        }
        Array out(static_cast<py::ssize_t>(g.size()));
        std::copy(g.begin(), g.end(), out.mutable_data());
        return py::make_tuple(objective, out);
      },
      py::arg("ic"), py::arg("n"), py::arg("steps"), py::arg("dt"),
      py::arg("params"), py::arg("reward") = "markovian",
      py::arg("normalize_obs") = true,
      "Total reward and its gradient with respect to the policy parameters.");

  m.def(
      "default_config", [] { return RunConfig{}.dump(); },
      "Default run configuration as key = value text.");

  m.def(
      "train",
      [](const std::string& config_text) {
        const RunConfig c = RunConfig::parse(config_text);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(c.train_config());
        }
        py::dict d;
        d["best_params"] = params_array(r.best);
        d["final_params"] = params_array(r.final_params);
        d["best_episode"] = r.best_episode;
        d["best_reward"] = r.best_reward;
        py::list evals;
        for (const auto& e : r.evals) {
          evals.append(py::make_tuple(e.episode, e.total_reward));
        }
        d["evals"] = evals;
        d["log_csv"] = format_log_csv(r.log);
        d["skipped_steps"] = r.skipped_steps;
        d["blowup_episodes"] = r.blowup_episodes;
        return d;
      },
      py::arg("config"), "Train from key = value config text.");

  m.def(
      "final_errors",
      [](const std::string& ic, int n, double t_end,
         const std::optional<Array>& params, double cfl, int reference_factor) {
        EvalSettings s;
        s.cfl = cfl;
        s.reference_factor = reference_factor;
        const auto p = maybe_params(params);
        const ICSpec spec = make_ic(ic);
        RunErrors e;
        {
          py::gil_scoped_release release;
          e = final_errors(p ? &*p : nullptr, spec,
                           n, t_end > 0.0 ? t_end : spec.t_max, s);
        }
        return errors_dict(e);
      },
      py::arg("ic"), py::arg("n"), py::arg("t_end") = 0.0,
      py::arg("params") = py::none(), py::arg("cfl") = 0.1,
      py::arg("reference_factor") = 8,
      "Final-time L2 errors against the refined reference.");

  m.def(
      "random_suite",
      [](int count, std::uint64_t seed, double t_end,
         const std::optional<Array>& params) {
        const auto p = maybe_params(params);
        std::vector<SuiteRow> rows;
        {
          py::gil_scoped_release release;
          rows = random_suite(p ? &*p : nullptr, count, seed, t_end,
                              EvalSettings{});
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d = errors_dict(r.errors);
          d["index"] = r.index;
          d["family"] = r.family;
          d["n"] = r.n;
          d["constants"] = r.constants;
          out.append(d);
        }
        return out;
      },
      py::arg("count"), py::arg("seed") = 0, py::arg("t_end") = 0.0,
      py::arg("params") = py::none());

  m.def(
      "gradcheck",
      [](std::vector<int> sizes, std::vector<int> steps,
         std::vector<std::uint64_t> seeds, std::size_t max_params) {
        GradcheckOptions o;
        o.sizes = std::move(sizes);
        o.steps = std::move(steps);
        o.seeds = std::move(seeds);
        o.max_params = max_params;
        GradcheckReport r;
        {
          py::gil_scoped_release release;
          r = run_gradcheck(o);
        }
        py::dict d;
        d["passed"] = r.passed;
        d["max_error"] = r.max_error;
        d["max_op_error"] = r.max_op_error;
        d["report"] = r.format();
        return d;
      },
      py::arg("sizes") = std::vector<int>{8}, py::arg("steps") = std::vector<int>{2},
      py::arg("seeds") = std::vector<std::uint64_t>{0},
      py::arg("max_params") = 0,
      "Finite-difference check of the reverse sweep.");
}
