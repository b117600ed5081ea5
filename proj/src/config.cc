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

#include "bptts/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "bptts/error.h"

namespace bptts {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value,
                      std::string_view what) {
  throw ConfigError("config key '" + std::string(key) + "': '" +
                    std::string(value) + "' is not " + std::string(what));
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    bad(key, v, "a number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "a boolean");
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field integer(T RunConfig::*m) {
  return {[m](RunConfig& c, std::string_view k, std::string_view v) {
            c.*m = parse_number<T>(k, v);
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Field real(double RunConfig::*m) {
  return {[m](RunConfig& c, std::string_view k, std::string_view v) {
            c.*m = parse_number<double>(k, v);
          },
          [m](const RunConfig& c) { return fmt(c.*m); }};
}

Field boolean(bool RunConfig::*m) {
  return {[m](RunConfig& c, std::string_view k, std::string_view v) {
            c.*m = parse_bool(k, v);
          },
          [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field text(std::string RunConfig::*m) {
  return {[m](RunConfig& c, std::string_view, std::string_view v) {
            c.*m = std::string(v);
          },
          [m](const RunConfig& c) { return c.*m; }};
}

Field names(std::vector<std::string> RunConfig::*m) {
  return {[m](RunConfig& c, std::string_view, std::string_view v) {
            std::vector<std::string> out;
            for (auto s : split(v)) out.emplace_back(s);
            c.*m = std::move(out);
          },
          [m](const RunConfig& c) { return join(c.*m); }};
}

template <class T>
Field numbers(std::vector<T> RunConfig::*m) {
  return {[m](RunConfig& c, std::string_view k, std::string_view v) {
            std::vector<T> out;
            for (auto s : split(v)) out.push_back(parse_number<T>(k, s));
            c.*m = std::move(out);
          },
          [m](const RunConfig& c) { return join(c.*m); }};
}

// Ordered so dump() reads top to bottom like a run description.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"system", text(&RunConfig::system)},
      {"ics", names(&RunConfig::ics)},
      {"eval_ics", names(&RunConfig::eval_ics)},
      {"n", integer(&RunConfig::n)},
      {"steps", integer(&RunConfig::steps)},
      {"dt_mode", text(&RunConfig::dt_mode)},
      {"dt", real(&RunConfig::dt)},
      {"cfl", real(&RunConfig::cfl)},
      {"episodes", integer(&RunConfig::episodes)},
      {"eval_every", integer(&RunConfig::eval_every)},
      {"learning_rate", real(&RunConfig::learning_rate)},
      {"grad_clip", real(&RunConfig::grad_clip)},
      {"seed", integer(&RunConfig::seed)},
      {"reward", text(&RunConfig::reward)},
      {"normalize_obs", boolean(&RunConfig::normalize_obs)},
      {"stop_gradient_anchor", boolean(&RunConfig::stop_gradient_anchor)},
      {"weno_epsilon", real(&RunConfig::weno_epsilon)},
      {"weno_p", integer(&RunConfig::weno_p)},
      {"reference_factor", integer(&RunConfig::reference_factor)},
      {"threads", integer(&RunConfig::threads)},
      {"log_wallclock", boolean(&RunConfig::log_wallclock)},
      {"out_dir", text(&RunConfig::out_dir)},
      {"checkpoint", text(&RunConfig::checkpoint)},
      {"baseline", boolean(&RunConfig::baseline)},
      {"grids", numbers(&RunConfig::grids)},
      {"t", text(&RunConfig::t)},
      {"count", integer(&RunConfig::count)},
      {"t_end", real(&RunConfig::t_end)},
      {"gc_sizes", numbers(&RunConfig::gc_sizes)},
      {"gc_steps", numbers(&RunConfig::gc_steps)},
      {"gc_seeds", numbers(&RunConfig::gc_seeds)},
      {"gc_max_params", integer(&RunConfig::gc_max_params)},
      {"gc_ic", text(&RunConfig::gc_ic)},
      {"gc_dt", real(&RunConfig::gc_dt)},
      {"gc_fault", text(&RunConfig::gc_fault)},
  };
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, key, trim(value));
}

std::string RunConfig::get(std::string_view key) const {
  return field(key).get(*this);
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& [k, f] : fields()) os << k << " = " << f.get(*this) << '\n';
  return os.str();
}

RunConfig RunConfig::parse(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    ++line_no;
    pos = nl + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig RunConfig::parse(std::string_view text) {
  return parse(text, RunConfig{});
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

WenoConstants RunConfig::weno() const {
  WenoConstants k;
  k.epsilon = weno_epsilon;
  k.p = weno_p;
  return k;
}

DtMode RunConfig::dt_setting() const {
  if (dt_mode == "fixed") return DtMode::fixed(dt);
  if (dt_mode == "cfl") return DtMode::cfl(cfl);
  throw ConfigError("dt_mode must be 'fixed' or 'cfl', got '" + dt_mode + "'");
}

void RunConfig::validate() const {
  parse_system(system);
  parse_reward(reward);
  dt_setting();
  weno().validate();
  if (n < 7) throw ConfigError("n must be >= 7");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(cfl > 0.0)) throw ConfigError("cfl must be > 0");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be >= 0");
  if (reference_factor < 1) throw ConfigError("reference_factor must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (count < 0) throw ConfigError("count must be >= 0");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
  for (int g : grids) {
    if (g < 7) throw ConfigError("grid sizes must be >= 7");
  }
  if (!gc_fault.empty() && !parse_op_kind(gc_fault)) {
    throw ConfigError("gc_fault: unknown op kind '" + gc_fault + "'");
  }
}

TrainConfig RunConfig::train_config() const {
  validate();
  TrainConfig c;
  c.system = parse_system(system);
  c.ics = ics;
  c.eval_ics = eval_ics;
  c.n = n;
  c.steps = steps;
  c.dt = dt_setting();
  c.episodes = episodes;
  c.eval_every = eval_every;
  c.adam.learning_rate = learning_rate;
  c.grad_clip = grad_clip;
  c.seed = seed;
  c.reward = parse_reward(reward);
  c.normalize_obs = normalize_obs;
  c.stop_gradient_anchor = stop_gradient_anchor;
  c.weno = weno();
  c.reference_factor = reference_factor;
  c.threads = threads;
  c.out_dir = out_dir;
  c.log_wallclock = log_wallclock;
  return c;
}

EvalSettings RunConfig::eval_settings() const {
  validate();
  EvalSettings s;
  s.cfl = cfl;
  s.reference_factor = reference_factor;
  s.weno = weno();
  s.normalize_obs = normalize_obs;
  s.threads = threads;
  return s;
}

GradcheckOptions RunConfig::gradcheck_options() const {
  validate();
  GradcheckOptions o;
  o.sizes = gc_sizes;
  o.steps = gc_steps;
  o.seeds = gc_seeds;
  o.max_params = gc_max_params;
  o.ic = gc_ic;
  o.dt = gc_dt;
  o.threads = threads;
  return o;
}

}  // namespace bptts
