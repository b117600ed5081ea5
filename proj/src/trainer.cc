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

#include "bptts/trainer.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "bptts/error.h"
#include "bptts/evaluation.h"

namespace bptts {
namespace {

template <class S>
FieldState<S> lift(const FieldState<double>& s, ad::Tape* tape) {
  if constexpr (std::is_same_v<S, double>) {
    return s;
  } else {
    return detach(s, *tape);
  }
}

// Runs the episode loop for either scalar type. `act` maps (agent
// observations, raw observations) to actions. Per-step reward sums are
// appended to `step_sums`.
template <class S, class Actor>
RolloutResult run_episode(const Episode& ep, int steps, Actor&& act,
                          ad::Tape* tape, std::vector<S>& step_sums) {
  const EnvSpec& env = ep.env;
  if (steps < 0) steps = env.steps;
  if (ep.reward != RewardVariant::kMarkovian &&
      static_cast<int>(ep.fixed_anchor.size()) < steps + 1) {
    throw ConfigError("episode '" + ep.name +
                      "': fixed anchor trajectory shorter than the horizon");
  }
  RolloutResult res;
  res.states.push_back(ep.initial);
  FieldState<S> state = lift<S>(ep.initial, tape);
  for (int t = 0; t < steps; ++t) {
    try {
      const FieldState<double>& cur = res.states.back();
      const double dt = compute_dt(cur, env);
      const auto obs = observe(state, env);
      std::vector<SubstencilWeights<S>> actions;
      if (env.normalize_obs) {
        std::vector<StencilObservation<S>> agent_obs;
        agent_obs.reserve(obs.size());
        for (const auto& o : obs) agent_obs.push_back(normalize_observation(o));
        actions = act(agent_obs, obs);
      } else {
        actions = act(obs, obs);
      }
      FieldState<S> next = transition(state, obs, actions, env, dt);
      FieldState<double> next_values = values_of(next);
      check_admissible(next_values, env, t + 1);

      std::vector<S> r;
      if (ep.reward == RewardVariant::kMarkovian) {
        if (env.stop_gradient_anchor) {
          const FieldState<S> frozen = lift<S>(cur, tape);
          r = interface_rewards(
              next, markovian_anchor(frozen, observe(frozen, env), env, dt));
        } else {
          r = interface_rewards(next, markovian_anchor(state, obs, env, dt));
        }
      } else {
        r = reward_fixed(next, ep.fixed_anchor[t + 1]);
      }
      const S step_sum = ad::sum(std::span<const S>(r));

      std::vector<double> rv;
      rv.reserve(r.size());
      for (const S& x : r) rv.push_back(ad::value_of(x));
      res.rewards.push_back(std::move(rv));
      res.dts.push_back(dt);
      res.total_reward += ad::value_of(step_sum);
      step_sums.push_back(step_sum);
      res.states.push_back(std::move(next_values));
      state = std::move(next);
    } catch (const BlowupError&) {
      res.blowup_step = t + 1;
      break;
    } catch (const DomainError&) {
      res.blowup_step = t + 1;
      break;
    }
  }
  return res;
}

double sum_in_order(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

}  // namespace

std::string_view to_string(RewardVariant r) {
  switch (r) {
    case RewardVariant::kMarkovian:
      return "markovian";
    case RewardVariant::kFixedWeno:
      return "fixed_weno";
    case RewardVariant::kFixedTrue:
      return "fixed_true";
  }
  return "?";
}

RewardVariant parse_reward(std::string_view name) {
  if (name == "markovian") return RewardVariant::kMarkovian;
  if (name == "fixed_weno") return RewardVariant::kFixedWeno;
  if (name == "fixed_true") return RewardVariant::kFixedTrue;
  throw ConfigError("unknown reward variant '" + std::string(name) + "'");
}

Episode make_episode(const ICSpec& ic, const EnvSpec& env,
                     RewardVariant reward, int reference_factor) {
  env.validate();
  if (env.system != ic.system || env.grid.boundary != ic.boundary) {
    throw ConfigError("episode '" + ic.name + "': IC does not match env");
  }
  Episode ep;
  ep.name = ic.name;
  ep.env = env;
  ep.initial = ic.initial_state(env.grid.n);
  ep.reward = reward;
  if (reward == RewardVariant::kFixedWeno) {
    Episode base = ep;
    base.reward = RewardVariant::kMarkovian;
    RolloutResult r = rollout(base, nullptr);
    if (r.blew_up()) {
      throw BlowupError(*r.blowup_step,
                        "WENO anchor trajectory blew up for '" + ic.name + "'");
    }
    ep.fixed_anchor = std::move(r.states);
  } else if (reward == RewardVariant::kFixedTrue) {
    if (env.dt.kind != DtMode::Kind::kFixed) {
      throw ConfigError("fixed_true reward needs a fixed dt");
    }
    ep.fixed_anchor = reference_trajectory(ic, env, reference_factor).states;
  }
  return ep;
}

RolloutResult rollout(const Episode& episode, const PolicyParams* policy,
                      int steps) {
  std::vector<double> sums;
  if (policy == nullptr) {
    const WenoConstants& k = episode.env.weno;
    return run_episode<double>(
        episode, steps,
        [&](const std::vector<StencilObservation<double>>&,
            const std::vector<StencilObservation<double>>& raw) {
          return weno_equivalent_policy(raw, k);
        },
        nullptr, sums);
  }
  return run_episode<double>(
      episode, steps,
      [&](const std::vector<StencilObservation<double>>& agent,
          const std::vector<StencilObservation<double>>&) {
        return policy_forward(agent, *policy);
      },
      nullptr, sums);
}

RecordedRollout record_rollout(const Episode& episode,
                               const PolicyParams& policy, int steps) {
  RecordedRollout rec;
  rec.tape = std::make_unique<ad::Tape>();
  TapedPolicy taped(*rec.tape, policy);
  rec.params.assign(taped.leaves().begin(), taped.leaves().end());
  std::vector<ad::Var> sums;
  rec.result = run_episode<ad::Var>(
      episode, steps,
      [&](const std::vector<StencilObservation<ad::Var>>& agent,
          const std::vector<StencilObservation<ad::Var>>&) {
        return taped.forward(agent);
      },
      rec.tape.get(), sums);
  rec.objective = sums.empty() ? rec.tape->constant(0.0)
                               : rec.tape->sum(std::span<const ad::Var>(sums));
  return rec;
}

std::vector<double> episode_gradient(const RecordedRollout& recorded) {
  ad::GradientMap g = recorded.tape->backward(recorded.objective);
  if (g.size() != PolicyParams::kCount) {
    throw ConfigError("recorded tape has unexpected trainable leaves");
  }
  return std::move(g.values);
}

std::vector<double> bptts_gradient(std::span<const Episode> batch,
                                   const PolicyParams& policy, int threads,
                                   std::vector<RolloutResult>* results) {
  const std::size_t m = batch.size();
  std::vector<std::vector<double>> grads(m);
  std::vector<RolloutResult> res(m);
  auto work = [&](std::size_t i) {
    RecordedRollout rec = record_rollout(batch[i], policy);
    grads[i] = episode_gradient(rec);
    res[i] = std::move(rec.result);
  };
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(m)));
  if (workers == 1) {
    for (std::size_t i = 0; i < m; ++i) work(i);
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < m; i = next++) work(i);
      }));
    }
    for (auto& f : futs) f.get();
  }
  std::vector<double> total(PolicyParams::kCount, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += grads[i][k];
  }
  if (results != nullptr) *results = std::move(res);
  return total;
}

bool adam_step(PolicyParams& params, std::span<const double> grad,
               AdamState& state, const AdamOptions& o) {
  const std::size_t n = params.values.size();
  if (grad.size() != n) throw ConfigError("adam: gradient size mismatch");
  for (double g : grad) {
    if (!std::isfinite(g)) return false;
  }
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * grad[i];
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    params.values[i] += o.learning_rate * mh / (std::sqrt(vh) + o.epsilon);
  }
  return true;
}

void TrainConfig::validate() const {
  if (ics.empty()) throw ConfigError("train: at least one training IC");
  if (n < 7) throw ConfigError("train: n must be >= 7");
  if (steps < 1) throw ConfigError("train: steps must be >= 1");
  if (episodes < 0) throw ConfigError("train: episodes must be >= 0");
  if (eval_every < 1) throw ConfigError("train: eval_every must be >= 1");
  if (!(adam.learning_rate > 0.0)) {
    throw ConfigError("train: learning_rate must be > 0");
  }
  if (!(grad_clip >= 0.0)) throw ConfigError("train: grad_clip must be >= 0");
  if (!(dt.value > 0.0)) throw ConfigError("train: dt/cfl must be > 0");
  if (threads < 1) throw ConfigError("train: threads must be >= 1");
  if (reference_factor < 1) {
    throw ConfigError("train: reference_factor must be >= 1");
  }
  weno.validate();
}

double evaluate_total_reward(std::span<const Episode> episodes,
                             const PolicyParams* policy,
                             std::vector<double>* per_episode) {
  std::vector<double> each;
  for (const Episode& ep : episodes) {
    Episode e = ep;
    e.reward = RewardVariant::kMarkovian;
    e.env.stop_gradient_anchor = false;
    e.fixed_anchor.clear();
    each.push_back(rollout(e, policy).total_reward);
  }
  const double total = sum_in_order(each);
  if (per_episode != nullptr) *per_episode = std::move(each);
  return total;
}

std::string format_log_csv(std::span<const LogEntry> log) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "episode,ic_name,total_reward,eval_flag,wallclock\n";
  for (const LogEntry& e : log) {
    os << e.episode << ',' << e.ic << ',' << e.total_reward << ','
       << e.eval_flag << ',' << e.wallclock << '\n';
  }
  return os.str();
}

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    if (!cfg.log_wallclock) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  auto say = [&](const std::string& s) {
    if (cfg.progress) cfg.progress(s);
  };

  auto build = [&](const std::vector<std::string>& names,
                   RewardVariant reward) {
    std::vector<Episode> eps;
    for (const std::string& name : names) {
      const ICSpec ic = make_ic(name);
      if (ic.system != cfg.system) {
        throw ConfigError("IC '" + name + "' does not belong to system " +
                          std::string(to_string(cfg.system)));
      }
      EnvSpec env = make_env(ic, cfg.n, cfg.dt, cfg.steps);
      env.weno = cfg.weno;
      env.normalize_obs = cfg.normalize_obs;
      env.stop_gradient_anchor = cfg.stop_gradient_anchor;
      eps.push_back(make_episode(ic, env, reward, cfg.reference_factor));
    }
    return eps;
  };
  const std::vector<Episode> train_eps = build(cfg.ics, cfg.reward);
  const std::vector<Episode> select_eps =
      build(cfg.ics, RewardVariant::kMarkovian);
  const std::vector<Episode> held_out =
      build(cfg.eval_ics, RewardVariant::kMarkovian);

  const bool write = !cfg.out_dir.empty();
  if (write) std::filesystem::create_directories(cfg.out_dir);
  auto ckpt_name = [](int episode) {
    std::ostringstream os;
    os << "checkpoint_" << std::setw(6) << std::setfill('0') << episode
       << ".bin";
    return os.str();
  };

  TrainResult out;
  PolicyParams params = init_params(cfg.seed);
  AdamState adam;
  out.best_reward = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](int episode) {
    std::vector<double> each;
    const double total = evaluate_total_reward(select_eps, &params, &each);
    for (std::size_t i = 0; i < each.size(); ++i) {
      out.log.push_back({episode, select_eps[i].name, each[i], 1, wall()});
    }
    if (!held_out.empty()) {
      std::vector<double> ho;
      evaluate_total_reward(held_out, &params, &ho);
      for (std::size_t i = 0; i < ho.size(); ++i) {
        out.log.push_back({episode, held_out[i].name, ho[i], 2, wall()});
      }
    }
    out.evals.push_back({episode, total});
    if (write) save_params(cfg.out_dir / ckpt_name(episode), params);
    if (total > out.best_reward || out.evals.size() == 1) {
      out.best_reward = total;
      out.best_episode = episode;
      out.best = params;
      if (write) {
        std::ofstream f(cfg.out_dir / "best");
        f << std::setprecision(17) << "episode " << episode << "\nreward "
          << total << "\ncheckpoint " << ckpt_name(episode) << "\n";
      }
    }
    std::ostringstream os;
    os << std::setprecision(6) << "episode " << episode << " eval reward "
       << total << " best " << out.best_reward << " @" << out.best_episode;
    say(os.str());
  };

  evaluate(0);
  const int batch = static_cast<int>(train_eps.size());
  int consecutive_blowups = 0;
  int episode = 0;
  while (episode < cfg.episodes) {
    std::vector<RolloutResult> results;
    std::vector<double> g = bptts_gradient(train_eps, params, cfg.threads,
                                           &results);
    int blown = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].blew_up()) ++blown;
      out.log.push_back({episode + static_cast<int>(i) + 1, train_eps[i].name,
                         results[i].total_reward, 0, wall()});
    }
    out.blowup_episodes += blown;
    consecutive_blowups = blown == batch ? consecutive_blowups + batch : 0;
    if (consecutive_blowups >= cfg.abort_after_blowups) {
      std::ostringstream os;
      os << "training aborted after " << consecutive_blowups
         << " consecutive diverged episodes (last blowup at step "
         << *results.back().blowup_step << " of '" << train_eps.back().name
         << "')";
      throw BlowupError(*results.back().blowup_step, os.str());
    }
    if (cfg.grad_clip > 0.0) {
      double norm2 = 0.0;
      for (double x : g) norm2 += x * x;
      const double norm = std::sqrt(norm2);
      if (norm > cfg.grad_clip) {
        const double s = cfg.grad_clip / norm;
        for (double& x : g) x *= s;
      }
    }
    if (!adam_step(params, g, adam, cfg.adam)) ++out.skipped_steps;

    const int before = episode;
    episode += batch;
    if (episode / cfg.eval_every != before / cfg.eval_every ||
        episode >= cfg.episodes) {
      evaluate(episode);
    }
  }
  out.final_params = params;
  if (write) {
    std::ofstream f(cfg.out_dir / "train_log.csv");
    f << format_log_csv(out.log);
  }
  return out;
}

}  // namespace bptts
