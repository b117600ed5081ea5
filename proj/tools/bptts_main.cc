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

// Command-line front end. Every subcommand accepts --config FILE, one
// --<key> flag per config key (flags win over the file) and --dump-config.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 numerical blowup, 4 gradient check failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bptts/config.h"
#include "bptts/error.h"
#include "bptts/evaluation.h"
#include "bptts/gradcheck.h"
#include "bptts/initial_conditions.h"
#include "bptts/policy.h"
#include "bptts/trainer.h"

namespace fs = std::filesystem;
using namespace bptts;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitGradcheck = 4;

struct Command {
  CLI::App* app = nullptr;
  std::string config_file;
  bool dump = false;
  std::map<std::string, std::string> flags;
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  std::cout << "wrote " << path.string() << "\n";
}

std::optional<PolicyParams> load_policy(const RunConfig& c) {
  if (c.baseline) return std::nullopt;
  if (c.checkpoint.empty()) {
    throw ConfigError("a checkpoint is required (or set --baseline true)");
  }
  return load_params(c.checkpoint);
}

double end_time(const RunConfig& c, const ICSpec& ic) {
  return c.t_end > 0.0 ? c.t_end : ic.t_max;
}

int run_train(const RunConfig& c) {
  TrainConfig tc = c.train_config();
  tc.progress = [](std::string_view s) { std::cout << s << std::endl; };
  write_file(fs::path(c.out_dir) / "config.txt", c.dump());
  const TrainResult r = train(tc);
  std::cout << std::setprecision(17) << "best episode " << r.best_episode
            << " reward " << r.best_reward << "\n";
  if (r.skipped_steps > 0) {
    std::cout << "skipped " << r.skipped_steps
              << " optimizer steps with non-finite gradients\n";
  }
  return 0;
}

int run_eval(const RunConfig& c) {
  const auto policy = load_policy(c);
  const PolicyParams* p = policy ? &*policy : nullptr;
  for (const std::string& name : c.ics) {
    const ICSpec ic = make_ic(name);
    EnvSpec env = make_env(ic, c.n, c.dt_setting(), c.steps);
    env.weno = c.weno();
    env.normalize_obs = c.normalize_obs;
    const Episode ep = make_episode(ic, env);
    const RolloutResult r = rollout(ep, p);
    std::ostringstream os;
    os << std::setprecision(17) << "step,t,step_reward,cumulative_reward\n";
    double cum = 0.0;
    for (std::size_t t = 0; t < r.rewards.size(); ++t) {
      double s = 0.0;
      for (double x : r.rewards[t]) s += x;
      cum += s;
      os << t + 1 << ',' << r.states[t + 1].time << ',' << s << ',' << cum
         << '\n';
    }
    write_file(fs::path(c.out_dir) /
                   ("eval_" + name + "_" + std::to_string(c.n) + ".csv"),
               os.str());
    std::cout << std::setprecision(17) << name << " total_reward "
              << r.total_reward;
    if (r.blew_up()) std::cout << " (diverged at step " << *r.blowup_step << ")";
    std::cout << "\n";
  }
  return 0;
}

int run_table(const RunConfig& c) {
  const auto policy = load_policy(c);
  const auto rows = error_table(policy ? &*policy : nullptr, c.ics, c.grids,
                                c.eval_settings());
  for (const std::string& name : c.ics) {
    std::vector<TableRow> mine;
    for (const auto& r : rows) {
      if (r.ic == name) mine.push_back(r);
    }
    write_file(fs::path(c.out_dir) / ("table_" + name + "_all.csv"),
               format_table_csv(mine));
  }
  const std::string wide = format_table_wide_csv(rows);
  write_file(fs::path(c.out_dir) / "table_all_all.csv", wide);
  std::cout << wide;
  return 0;
}

int run_series(const RunConfig& c) {
  const auto policy = load_policy(c);
  for (const std::string& name : c.ics) {
    const ICSpec ic = make_ic(name);
    const auto rows = error_series(policy ? &*policy : nullptr, ic, c.n,
                                   end_time(c, ic), c.eval_settings());
    write_file(fs::path(c.out_dir) /
                   ("series_" + name + "_" + std::to_string(c.n) + ".csv"),
               format_series_csv(rows));
  }
  return 0;
}

int run_suite(const RunConfig& c) {
  const auto policy = load_policy(c);
  const auto rows = random_suite(policy ? &*policy : nullptr, c.count, c.seed,
                                 c.t_end, c.eval_settings());
  write_file(fs::path(c.out_dir) / "random-suite_random_mixed.csv",
             format_suite_csv(rows));
  std::vector<double> rl, weno;
  int diverged = 0;
  for (const auto& r : rows) {
    if (r.errors.rl_diverged || r.errors.weno_diverged) {
      ++diverged;
      continue;
    }
    rl.push_back(r.errors.rl_error);
    weno.push_back(r.errors.weno_error);
  }
  std::cout << "environments " << rows.size() << ", diverged " << diverged
            << "\n";
  if (rl.size() >= 2) {
    std::cout << std::setprecision(6) << "spearman(rl, weno) "
              << spearman(rl, weno) << "\n";
  }
  return 0;
}

int run_actions(const RunConfig& c) {
  const auto policy = load_policy(c);
  if (!policy) throw ConfigError("actions needs a checkpoint");
  const EvalSettings s = c.eval_settings();
  for (const std::string& name : c.ics) {
    const ICSpec ic = make_ic(name);
    const double te = end_time(c, ic);
    const int steps = evaluation_timeline(ic, c.n, te, s.cfl).steps;
    int tq = 0;
    if (c.t == "second_to_last") {
      tq = steps - 2;
    } else if (c.t == "last") {
      tq = steps - 1;
    } else {
      RunConfig tmp;
      tmp.set("steps", c.t);
      tq = tmp.steps;
    }
    const auto rows = action_dump(*policy, ic, c.n, te, tq, s);
    write_file(fs::path(c.out_dir) /
                   ("actions_" + name + "_" + std::to_string(c.n) + ".csv"),
               format_actions_csv(rows));
  }
  return 0;
}

int run_gradcheck(const RunConfig& c) {
  const GradcheckOptions o = c.gradcheck_options();
  if (!c.gc_fault.empty()) ad::set_adjoint_fault(parse_op_kind(c.gc_fault));
  const GradcheckReport r = run_gradcheck(o);
  ad::set_adjoint_fault(std::nullopt);
  std::cout << r.format();
  return r.passed ? 0 : kExitGradcheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned WENO sub-stencil weights trained by backpropagation "
               "through time and space"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"train", "train a policy"},
      {"eval", "total reward of a policy on the configured ICs"},
      {"table", "final-time L2 errors across grids"},
      {"series", "L2 error at every step"},
      {"random-suite", "errors on randomized environments"},
      {"actions", "policy and WENO weights at one step"},
      {"gradcheck", "finite-difference check of the reverse sweep"},
  };
  std::vector<Command> cmds(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    Command& cmd = cmds[i];
    cmd.app = app.add_subcommand(commands[i].first, commands[i].second);
    cmd.app->add_option("--config", cmd.config_file, "key = value file");
    cmd.app->add_flag("--dump-config", cmd.dump,
                      "print the effective configuration and exit");
    for (const std::string& key : RunConfig::keys()) {
      cmd.app->add_option("--" + key, cmd.flags[key]);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      const Command& cmd = cmds[i];
      if (!cmd.app->parsed()) continue;
      RunConfig c;
      if (!cmd.config_file.empty()) c = RunConfig::load(cmd.config_file);
      for (const auto& [key, value] : cmd.flags) {
        if (cmd.app->count("--" + key) > 0) c.set(key, value);
      }
      c.command = commands[i].first;
      c.validate();
      if (cmd.dump) {
        std::cout << c.dump();
        return 0;
      }
      const std::string& name = c.command;
      if (name == "train") return run_train(c);
      if (name == "eval") return run_eval(c);
      if (name == "table") return run_table(c);
      if (name == "series") return run_series(c);
      if (name == "random-suite") return run_suite(c);
      if (name == "actions") return run_actions(c);
      if (name == "gradcheck") return run_gradcheck(c);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "bad checkpoint: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BlowupError& e) {
    std::cerr << "numerical blowup at step " << e.step() << ": " << e.what()
              << "\n";
    return kExitBlowup;
  } catch (const DomainError& e) {
    std::cerr << "numerical blowup: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
