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

#include "bptts/gradcheck.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "bptts/error.h"
#include "bptts/initial_conditions.h"
#include "bptts/policy.h"
#include "bptts/trainer.h"

namespace bptts {
namespace {

using ad::OpKind;

std::vector<std::size_t> param_subset(std::size_t max_params) {
  const std::size_t total = PolicyParams::kCount;
  const std::size_t stride =
      max_params == 0 || max_params >= total
          ? 1
          : (total + max_params - 1) / max_params;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < total; i += stride) idx.push_back(i);
  return idx;
}

int arity(OpKind k) {
  switch (k) {
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kDiv:
    case OpKind::kMin:
    case OpKind::kMax:
      return 2;
    case OpKind::kSum:
      return 4;
    default:
      return 1;
  }
}

// Value of `kind` applied to plain inputs, via a throwaway tape.
double eval_op(OpKind kind, const std::vector<double>& x, double scale) {
  ad::Tape t;
  std::vector<ad::Var> in;
  for (double v : x) in.push_back(t.leaf(v));
  return t.apply(kind, in, scale).value();
}

double op_error(OpKind kind, std::mt19937_64& rng,
                const GradcheckOptions& o) {
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution neg(0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> x(arity(kind));
    for (double& v : x) {
      v = mag(rng);
      if (kind != OpKind::kSqrt && neg(rng)) v = -v;
    }
    // Keep min/max operands apart so the difference quotient never
    // straddles the switch.
    if ((kind == OpKind::kMin || kind == OpKind::kMax) &&
        std::abs(x[0] - x[1]) < 0.1) {
      x[1] = x[0] + 0.5;
    }
    const double scale = kind == OpKind::kScale ? mag(rng) : 1.0;
    ad::Tape t;
    std::vector<ad::Var> in;
    for (double v : x) in.push_back(t.leaf(v, /*trainable=*/true));
    const ad::Var y = t.apply(kind, in, scale);
    const ad::GradientMap g = t.backward(y);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += o.h;
      xm[i] -= o.h;
      const double fd =
          (eval_op(kind, xp, scale) - eval_op(kind, xm, scale)) / (2.0 * o.h);
      worst = std::max(worst, gradcheck_error(g.values[i], fd, o.abs_floor));
    }
  }
  return worst;
}

// The policy block: objective sum_k c_k * out_k over a two-observation
// batch, checked on every input and a strided subset of the parameters.
double block_error(std::mt19937_64& rng, const GradcheckOptions& o) {
  const PolicyParams params = random_params(rng());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<StencilObservation<double>> obs(2);
  for (auto& ob : obs) {
    for (auto& v : ob.plus) v = u(rng);
    for (auto& v : ob.minus) v = u(rng);
  }
  std::vector<double> coef(obs.size() * 6);
  for (double& c : coef) c = u(rng);

  auto objective = [&](const std::vector<StencilObservation<double>>& ob,
                       const PolicyParams& p) {
    const auto w = policy_forward(ob, p);
    double s = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) {
      for (int k = 0; k < 3; ++k) {
        s += coef[6 * b + k] * w[b].plus[k];
        s += coef[6 * b + 3 + k] * w[b].minus[k];
      }
    }
    return s;
  };

  ad::Tape t;
  TapedPolicy taped(t, params);
  std::vector<StencilObservation<ad::Var>> vobs(obs.size());
  for (std::size_t b = 0; b < obs.size(); ++b) {
    for (int k = 0; k < 5; ++k) {
      vobs[b].plus[k] = t.leaf(obs[b].plus[k], true);
      vobs[b].minus[k] = t.leaf(obs[b].minus[k], true);
    }
  }
  const auto w = taped.forward(vobs);
  std::vector<ad::Var> terms;
  for (std::size_t b = 0; b < w.size(); ++b) {
    for (int k = 0; k < 3; ++k) {
      terms.push_back(w[b].plus[k] * coef[6 * b + k]);
      terms.push_back(w[b].minus[k] * coef[6 * b + 3 + k]);
    }
  }
  const ad::GradientMap g = t.backward(t.sum(terms));

  double worst = 0.0;
  for (std::size_t i : param_subset(500)) {
    PolicyParams pp = params, pm = params;
    pp.values[i] += o.h;
    pm.values[i] -= o.h;
    const double fd = (objective(obs, pp) - objective(obs, pm)) / (2.0 * o.h);
    worst = std::max(worst, gradcheck_error(g.values[i], fd, o.abs_floor));
  }
  // Input leaves were registered as plus[k], minus[k] pairs.
  for (std::size_t b = 0; b < obs.size(); ++b) {
    for (int k = 0; k < 5; ++k) {
      for (int side = 0; side < 2; ++side) {
        const std::size_t slot = PolicyParams::kCount + 10 * b + 2 * k + side;
        auto op = obs, om = obs;
        (side == 0 ? op[b].plus : op[b].minus)[k] += o.h;
        (side == 0 ? om[b].plus : om[b].minus)[k] -= o.h;
        const double fd =
            (objective(op, params) - objective(om, params)) / (2.0 * o.h);
        worst =
            std::max(worst, gradcheck_error(g.values[slot], fd, o.abs_floor));
      }
    }
  }
  return worst;
}

}  // namespace

double gradcheck_error(double analytic, double numeric, double abs_floor) {
  const double diff = std::abs(analytic - numeric);
  if (!std::isfinite(diff)) return std::numeric_limits<double>::infinity();
  if (diff <= abs_floor) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (int k = 0; k < ad::kNumOpKinds; ++k) {
    const auto kind = static_cast<OpKind>(k);
    if (ad::to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

RolloutCheck check_rollout(int n, int steps, std::uint64_t seed,
                           const GradcheckOptions& o) {
  std::mt19937_64 rng(seed);
  const ICSpec ic = make_ic(o.ic, &rng);
  if (ic.system != System::kBurgers) {
    throw ConfigError("gradcheck: '" + o.ic + "' is not a Burgers IC");
  }
  const EnvSpec env = make_env(ic, n, DtMode::fixed(o.dt), steps);
  const Episode ep = make_episode(ic, env);
  const PolicyParams params = random_params(seed);

  RecordedRollout rec = record_rollout(ep, params);
  if (rec.result.blew_up()) {
    throw BlowupError(*rec.result.blowup_step, "gradcheck rollout blew up");
  }
  const std::vector<double> grad = episode_gradient(rec);

  const std::vector<std::size_t> idx = param_subset(o.max_params);
  std::vector<double> fd(idx.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    PolicyParams p = params;
    for (std::size_t k = next++; k < idx.size(); k = next++) {
      const std::size_t i = idx[k];
      p.values[i] = params.values[i] + o.h;
      const double rp = rollout(ep, &p).total_reward;
      p.values[i] = params.values[i] - o.h;
      const double rm = rollout(ep, &p).total_reward;
      p.values[i] = params.values[i];
      fd[k] = (rp - rm) / (2.0 * o.h);
    }
  };
  const int workers = std::max(1, o.threads);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::future<void>> futs;
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, work));
    }
    for (auto& f : futs) f.get();
  }

  RolloutCheck c;
  c.n = n;
  c.steps = steps;
  c.seed = seed;
  c.checked = idx.size();
  c.objective = rec.result.total_reward;
  double max_diff = 0.0, max_grad = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    max_diff = std::max(max_diff, std::abs(grad[idx[k]] - fd[k]));
    max_grad = std::max(max_grad, std::abs(grad[idx[k]]));
    const double e = gradcheck_error(grad[idx[k]], fd[k], o.abs_floor);
    if (e > c.max_error || k == 0) {
      c.max_error = e;
      c.worst_param = idx[k];
      c.worst_analytic = grad[idx[k]];
      c.worst_numeric = fd[k];
    }
  }
  c.normalized_error = max_grad > 0.0 ? max_diff / max_grad : max_diff;
  return c;
}

std::vector<OpCheck> check_ops(std::uint64_t seed, const GradcheckOptions& o) {
  std::mt19937_64 rng(seed);
  std::vector<OpCheck> out;
  for (int k = 1; k < ad::kNumOpKinds; ++k) {
    const auto kind = static_cast<OpKind>(k);
    const double e = kind == OpKind::kBlockOutput ? block_error(rng, o)
                                                  : op_error(kind, rng, o);
    out.push_back({kind, e});
  }
  return out;
}

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  if (!(o.h > 0.0) || !(o.tolerance > 0.0) || !(o.abs_floor >= 0.0)) {
    throw ConfigError("gradcheck: h and tolerance must be positive");
  }
  GradcheckReport r;
  for (std::uint64_t seed : o.seeds) {
    for (int n : o.sizes) {
      for (int t : o.steps) {
        r.rollouts.push_back(check_rollout(n, t, seed, o));
        r.max_error = std::max(r.max_error, r.rollouts.back().max_error);
      }
    }
  }
  if (o.check_ops) {
    r.ops = check_ops(o.seeds.empty() ? 0 : o.seeds.front(), o);
    const auto worst = std::max_element(
        r.ops.begin(), r.ops.end(),
        [](const OpCheck& a, const OpCheck& b) { return a.max_error < b.max_error; });
    r.worst_kind = worst->kind;
    r.max_op_error = worst->max_error;
  }
  r.passed = r.max_error < o.tolerance && r.max_op_error < o.op_tolerance;
  return r;
}

std::string GradcheckReport::format() const {
  std::ostringstream os;
  os << std::setprecision(6);
  for (const auto& c : rollouts) {
    os << "rollout N=" << c.n << " T=" << c.steps << " seed=" << c.seed
       << " params=" << c.checked << " R=" << c.objective
       << " max_rel_err=" << c.max_error
       << " normalized_err=" << c.normalized_error << " worst_param=" << c.worst_param
       << " (analytic " << c.worst_analytic << ", numeric " << c.worst_numeric
       << ")\n";
  }
  for (const auto& op : ops) {
    os << "op " << ad::to_string(op.kind) << " max_rel_err=" << op.max_error
       << "\n";
  }
  if (worst_kind) {
    os << "worst node kind: " << ad::to_string(*worst_kind)
       << " (max_rel_err " << max_op_error << ")\n";
  }
  os << "rollout max relative error " << max_error << ": "
     << (passed ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace bptts
