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

// Error measurement against a fine-grid WENO reference.
//
// The reference runs the same scheme on factor * N cells with dt / factor,
// so its snapshots land exactly on the coarse time levels, and each coarse
// cell is compared with the mean of the fine cells it covers. Cross-N runs
// use one uniform dt per (IC, N) derived from the initial wavespeed.

#ifndef BPTTS_EVALUATION_H_
#define BPTTS_EVALUATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bptts/environment.h"
#include "bptts/initial_conditions.h"
#include "bptts/policy.h"
#include "bptts/trainer.h"

namespace bptts {

struct EvalSettings {
  double cfl = 0.1;
  int reference_factor = 8;
  WenoConstants weno;
  bool normalize_obs = true;
  int threads = 1;  // independent (IC, N) runs in parallel
};

struct Timeline {
  double dt = 0.0;
  int steps = 0;
};

// Uniform step reaching t_end exactly: K = ceil(t_end * alpha0 / (C dx)).
Timeline evaluation_timeline(const ICSpec& ic, int n, double t_end,
                             double cfl);

// Fixed-dt environment for an evaluation run.
EnvSpec evaluation_env(const ICSpec& ic, int n, const Timeline& tl,
                       const EvalSettings& s);

struct Reference {
  // Coarse-grid snapshots at t = 0, dt, ..., steps * dt (only the last one
  // when keep_all is false).
  std::vector<FieldState<double>> states;
  int factor = 8;
  std::optional<int> blowup_step;  // fine step
};

// `coarse` must use a fixed dt.
Reference reference_trajectory(const ICSpec& ic, const EnvSpec& coarse,
                               int factor, bool keep_all = true);

// Mean of each block of `factor` consecutive cells.
FieldState<double> cell_average_down(const FieldState<double>& fine,
                                     int factor);

struct RunErrors {
  double rl_error = 0.0;    // NaN when diverged
  double weno_error = 0.0;  // NaN when diverged
  bool rl_diverged = false;
  bool weno_diverged = false;
};

// Final-time L2 errors of the policy and of WENO for one (IC, N). A null
// policy reports WENO in both columns.
RunErrors final_errors(const PolicyParams* policy, const ICSpec& ic, int n,
                       double t_end, const EvalSettings& s);

struct TableRow {
  std::string ic;
  int n = 0;
  RunErrors errors;
};

std::vector<TableRow> error_table(const PolicyParams* policy,
                                  std::span<const std::string> ics,
                                  std::span<const int> grids,
                                  const EvalSettings& s);

struct SeriesRow {
  int step = 0;
  double t = 0.0;
  double rl_error = 0.0;
  double weno_error = 0.0;
};

// Error at every coarse step 0..T (T + 1 rows). Rows after a divergence
// carry NaN in that column.
std::vector<SeriesRow> error_series(const PolicyParams* policy,
                                    const ICSpec& ic, int n, double t_end,
                                    const EvalSettings& s);

struct SuiteRow {
  int index = 0;
  std::string family;
  int n = 0;
  std::array<double, 5> constants{};
  RunErrors errors;
};

// `count` random environments; environment i uses family i % 3 and is
// drawn from a stream seeded by (seed, i), so any row can be reproduced
// alone.
std::vector<SuiteRow> random_suite(const PolicyParams* policy, int count,
                                   std::uint64_t seed, double t_end,
                                   const EvalSettings& s);

struct ActionRow {
  int component = 0;
  int interface = 0;
  double x = 0.0;
  Triple<double> rl_plus{}, rl_minus{};
  Triple<double> weno_plus{}, weno_minus{};
};

// Policy and WENO actions at step `t_query` of a policy rollout (the state
// the policy itself produced).
std::vector<ActionRow> action_dump(const PolicyParams& policy,
                                   const ICSpec& ic, int n, double t_end,
                                   int t_query, const EvalSettings& s);

// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

std::string format_table_csv(std::span<const TableRow> rows);
// One row per N, (rl, weno) column pair per IC.
std::string format_table_wide_csv(std::span<const TableRow> rows);
std::string format_series_csv(std::span<const SeriesRow> rows);
std::string format_suite_csv(std::span<const SuiteRow> rows);
std::string format_actions_csv(std::span<const ActionRow> rows);

}  // namespace bptts

#endif  // BPTTS_EVALUATION_H_
