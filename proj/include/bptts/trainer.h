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

// Backpropagation through time and space.
//
// An episode is unrolled on a tape: at every step the environment observes
// the state, the shared policy acts at every interface, the transition
// advances the state and the reward compares it with a WENO step. The
// objective is the sum of all rewards; one reverse sweep gives its gradient
// with respect to the shared parameters, accumulated over every agent
// instance in space and time.

#ifndef BPTTS_TRAINER_H_
#define BPTTS_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bptts/autodiff.h"
#include "bptts/environment.h"
#include "bptts/initial_conditions.h"
#include "bptts/policy.h"

namespace bptts {

enum class RewardVariant { kMarkovian, kFixedWeno, kFixedTrue };

std::string_view to_string(RewardVariant r);
RewardVariant parse_reward(std::string_view name);

struct Episode {
  std::string name;
  EnvSpec env;
  FieldState<double> initial;
  RewardVariant reward = RewardVariant::kMarkovian;
  // w_0 .. w_T for the fixed-solution rewards.
  std::vector<FieldState<double>> fixed_anchor;
};

// Builds an episode for `ic`; fixed-solution anchors are computed here
// (WENO from the IC, or the fine-grid reference with `reference_factor`).
Episode make_episode(const ICSpec& ic, const EnvSpec& env,
                     RewardVariant reward = RewardVariant::kMarkovian,
                     int reference_factor = 8);

struct RolloutResult {
  std::vector<FieldState<double>> states;    // s^0 .. s^T (fewer on blowup)
  std::vector<std::vector<double>> rewards;  // [step][interface]
  std::vector<double> dts;
  double total_reward = 0.0;
  std::optional<int> blowup_step;

  bool blew_up() const { return blowup_step.has_value(); }
};

// Plain-double rollout. A null policy acts with the WENO-equivalent
// weights. `steps` < 0 uses env.steps.
RolloutResult rollout(const Episode& episode, const PolicyParams* policy,
                      int steps = -1);

struct RecordedRollout {
  RolloutResult result;
  std::unique_ptr<ad::Tape> tape;
  ad::Var objective;
  std::vector<ad::Var> params;
};

// Same arithmetic as rollout(), recorded on a fresh tape.
RecordedRollout record_rollout(const Episode& episode,
                               const PolicyParams& policy, int steps = -1);

// d objective / d params for one recorded episode (flat parameter layout).
std::vector<double> episode_gradient(const RecordedRollout& recorded);

// Sum of per-episode gradients, reduced in batch order. Episodes may run on
// up to `threads` threads; the result does not depend on the thread count.
std::vector<double> bptts_gradient(std::span<const Episode> batch,
                                   const PolicyParams& policy, int threads = 1,
                                   std::vector<RolloutResult>* results = nullptr);

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// Bias-corrected Adam step that ASCENDS the objective. Returns false and
// leaves everything untouched when the gradient has non-finite entries.
bool adam_step(PolicyParams& params, std::span<const double> grad,
               AdamState& state, const AdamOptions& options);

struct TrainConfig {
  System system = System::kBurgers;
  std::vector<std::string> ics = {"standing_sine", "rarefaction",
                                  "accelerating_shock"};
  std::vector<std::string> eval_ics;  // logged only
  int n = 128;
  int steps = 250;
  DtMode dt = DtMode::fixed(4e-4);
  int episodes = 10000;
  int eval_every = 50;
  AdamOptions adam;
  double grad_clip = 0.0;  // max gradient 2-norm; 0 disables
  std::uint64_t seed = 0;
  RewardVariant reward = RewardVariant::kMarkovian;
  bool normalize_obs = true;
  bool stop_gradient_anchor = false;
  WenoConstants weno;
  int reference_factor = 8;
  int threads = 1;
  int abort_after_blowups = 10;
  std::filesystem::path out_dir;  // empty: nothing written
  bool log_wallclock = true;
  std::function<void(std::string_view)> progress;

  void validate() const;
};

struct LogEntry {
  int episode = 0;
  std::string ic;
  double total_reward = 0.0;
  int eval_flag = 0;  // 0 training episode, 1 selection eval, 2 held-out eval
  double wallclock = 0.0;
};

struct EvalPoint {
  int episode = 0;
  double total_reward = 0.0;  // summed over training ICs
};

struct TrainResult {
  PolicyParams best;
  PolicyParams final_params;
  int best_episode = 0;
  double best_reward = 0.0;
  std::vector<EvalPoint> evals;
  std::vector<LogEntry> log;
  int skipped_steps = 0;
  int blowup_episodes = 0;
};

TrainResult train(const TrainConfig& config);

// Markovian evaluation reward of `policy` on the given episodes (training
// horizon), summed in order.
double evaluate_total_reward(std::span<const Episode> episodes,
                             const PolicyParams* policy,
                             std::vector<double>* per_episode = nullptr);

std::string format_log_csv(std::span<const LogEntry> log);

}  // namespace bptts

#endif  // BPTTS_TRAINER_H_
