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

// Finite-difference verification of the reverse sweep, both per local
// adjoint rule and end to end through short Burgers rollouts.

#ifndef BPTTS_GRADCHECK_H_
#define BPTTS_GRADCHECK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bptts/autodiff.h"

namespace bptts {

struct GradcheckOptions {
  std::vector<int> sizes = {8, 16};
  std::vector<int> steps = {2, 5};
  std::vector<std::uint64_t> seeds = {0};
  double h = 1e-6;
  double tolerance = 1e-6;
  double abs_floor = 1e-10;
  // Local rule checks see O(1) values, so their difference quotients carry
  // roundoff near 1e-10 / |derivative|; they only need to expose wrong rules.
  double op_tolerance = 1e-4;
  // Episode for the rollout checks: a named Burgers IC, or "random_sine"
  // drawn from the case seed. Per-entry agreement to 1e-6 is only
  // resolvable when the state is small: FD noise grows like eps * |u| / h.
  std::string ic = "standing_sine";
  double dt = 4e-3;
  // Check every k-th parameter so at most this many are checked; 0 = all.
  std::size_t max_params = 0;
  int threads = 1;
  bool check_ops = true;
};

// |a - b| / max(|a|, |b|), except that differences at or below `abs_floor`
// count as zero.
double gradcheck_error(double analytic, double numeric, double abs_floor);

struct RolloutCheck {
  int n = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  std::size_t checked = 0;
  double objective = 0.0;
  double max_error = 0.0;
  // max |analytic - numeric| / max |analytic|: scale-free, insensitive to
  // tiny entries.
  double normalized_error = 0.0;
  std::size_t worst_param = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct OpCheck {
  ad::OpKind kind = ad::OpKind::kLeaf;
  double max_error = 0.0;
};

struct GradcheckReport {
  std::vector<RolloutCheck> rollouts;
  std::vector<OpCheck> ops;
  double max_error = 0.0;     // over rollouts
  double max_op_error = 0.0;  // over local rules
  std::optional<ad::OpKind> worst_kind;
  bool passed = false;

  std::string format() const;
};

// Burgers episode with random parameters; central differences on the
// plain rollout against one reverse sweep.
RolloutCheck check_rollout(int n, int steps, std::uint64_t seed,
                           const GradcheckOptions& options);

// Every scalar rule plus the policy block, on random inputs.
std::vector<OpCheck> check_ops(std::uint64_t seed,
                               const GradcheckOptions& options);

GradcheckReport run_gradcheck(const GradcheckOptions& options);

std::optional<ad::OpKind> parse_op_kind(std::string_view name);

}  // namespace bptts

#endif  // BPTTS_GRADCHECK_H_
