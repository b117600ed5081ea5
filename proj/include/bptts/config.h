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

// Run configuration: a flat `key = value` text file. Lines starting with
// '#' are comments; lists are comma separated. Defaults reproduce the
// Burgers training setup.

#ifndef BPTTS_CONFIG_H_
#define BPTTS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bptts/evaluation.h"
#include "bptts/gradcheck.h"
#include "bptts/trainer.h"

namespace bptts {

struct RunConfig {
  std::string command;
  std::string system = "burgers";
  std::vector<std::string> ics = {"standing_sine", "rarefaction",
                                  "accelerating_shock"};
  std::vector<std::string> eval_ics;
  int n = 128;
  int steps = 250;
  std::string dt_mode = "fixed";
  double dt = 4e-4;
  double cfl = 0.1;
  int episodes = 10000;
  int eval_every = 50;
  double learning_rate = 3e-4;
  double grad_clip = 0.0;
  std::uint64_t seed = 0;
  std::string reward = "markovian";
  bool normalize_obs = true;
  bool stop_gradient_anchor = false;
  double weno_epsilon = 1e-6;
  int weno_p = 2;
  int reference_factor = 8;
  int threads = 1;
  bool log_wallclock = true;
  std::string out_dir = "runs";
  std::string checkpoint;
  bool baseline = false;  // score WENO only, no checkpoint
  std::vector<int> grids = {64, 128, 256, 512, 1024};
  std::string t = "second_to_last";
  int count = 1200;
  double t_end = 0.0;  // 0: the IC's own end time
  std::vector<int> gc_sizes = {8, 16};
  std::vector<int> gc_steps = {2, 5};
  std::vector<std::uint64_t> gc_seeds = {0};
  std::size_t gc_max_params = 0;
  std::string gc_ic = "standing_sine";
  double gc_dt = 4e-3;
  std::string gc_fault;  // op kind whose adjoint is flipped, for diagnostics

  static const std::vector<std::string>& keys();
  // Throws ConfigError on unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  // Every key except `command`, one per line, parseable by parse().
  std::string dump() const;
  // Keys not present in `text` keep their value from `base`.
  static RunConfig parse(std::string_view text, RunConfig base);
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  void validate() const;
  TrainConfig train_config() const;
  EvalSettings eval_settings() const;
  GradcheckOptions gradcheck_options() const;
  WenoConstants weno() const;
  DtMode dt_setting() const;

  bool operator==(const RunConfig&) const = default;
};

}  // namespace bptts

#endif  // BPTTS_CONFIG_H_
