#pragma once

// Config-driven experiment runner: INI-style config files with strict key
// checking, per-seed training runs with crash-safe CSV metrics, ablation
// suite generation, result aggregation/reporting, and the two verification
// suites (reward shaping, policy mixing) behind the CLI.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "fac/learner.hpp"
#include "fac/mdp.hpp"
#include "fac/theory.hpp"

namespace fac {

namespace fs = std::filesystem;

struct PriorSpec {
  std::string policy = "oracle";   // oracle | null
  std::string value = "oracle";    // oracle | null
  std::string success = "oracle";  // oracle | null
  std::vector<std::string> policy_corruption;   // discretize | uniform:P | invert:P
  std::vector<std::string> value_corruption;    // noise:STD | quant:L
  std::vector<std::string> success_corruption;  // flip:FP:FN
  std::uint64_t corruption_seed = 12345;

  bool operator==(const PriorSpec&) const = default;
};

struct RunConfig {
  std::string env_name = "point-reach";
  PriorSpec priors;
  std::string preset = "sim";
  FacConfig fac;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  long total_frames = 30000;
  long eval_interval = 1000;
  int eval_episodes = 10;
  std::string output_dir;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double parse_double(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError(ctx + ": expected a number, got '" + v + "'");
  }
}

inline long parse_long(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError(ctx + ": expected an integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(ctx + ": expected a boolean, got '" + v + "'");
}

inline std::string fmt_double(double d) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

inline std::string fmt_metric(double d) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", d);
  return buf;
}

}  // namespace detail

// Strict INI-style parser: sections [env], [priors], [fac], [run]; '#' or ';'
// comments; unknown sections or keys are rejected with the offending line.
inline RunConfig load_config_text(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  // [fac] keys are collected first so `preset` applies before overrides
  // regardless of ordering in the file.
  std::vector<std::pair<std::string, std::string>> fac_keys;
  std::string fac_preset = "sim";

  auto err = [&](const std::string& msg) {
    throw detail::ConfigError("config line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') err("malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "env" && section != "priors" && section != "fac" &&
          section != "run")
        err("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) err("expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (section.empty()) err("key '" + key + "' outside any section");
    std::string ctx = "config line " + std::to_string(lineno) + " [" + section +
                      "] " + key;

    if (section == "env") {
      if (key == "name") cfg.env_name = val;
      else err("unknown key '" + key + "' in [env]");
    } else if (section == "priors") {
      if (key == "policy" || key == "value" || key == "success") {
        if (val != "oracle" && val != "null")
          err("provider must be 'oracle' or 'null'");
        if (key == "policy") cfg.priors.policy = val;
        else if (key == "value") cfg.priors.value = val;
        else cfg.priors.success = val;
      } else if (key == "policy_corruption") {
        cfg.priors.policy_corruption = detail::split_ws(val);
      } else if (key == "value_corruption") {
        cfg.priors.value_corruption = detail::split_ws(val);
      } else if (key == "success_corruption") {
        cfg.priors.success_corruption = detail::split_ws(val);
      } else if (key == "corruption_seed") {
        cfg.priors.corruption_seed =
            static_cast<std::uint64_t>(detail::parse_long(val, ctx));
      } else {
        err("unknown key '" + key + "' in [priors]");
      }
    } else if (section == "fac") {
      if (key == "preset") {
        if (val != "sim" && val != "robot") err("preset must be 'sim' or 'robot'");
        fac_preset = val;
      } else {
        fac_keys.emplace_back(key, val);
      }
    } else {  // run
      if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& tok : detail::split_ws(val))
          cfg.seeds.push_back(
              static_cast<std::uint64_t>(detail::parse_long(tok, ctx)));
      } else if (key == "total_frames") {
        cfg.total_frames = detail::parse_long(val, ctx);
      } else if (key == "eval_interval") {
        cfg.eval_interval = detail::parse_long(val, ctx);
      } else if (key == "eval_episodes") {
        cfg.eval_episodes = static_cast<int>(detail::parse_long(val, ctx));
      } else if (key == "output_dir") {
        cfg.output_dir = val;
      } else {
        err("unknown key '" + key + "' in [run]");
      }
    }
  }

  cfg.preset = fac_preset;
  cfg.fac = fac_preset == "robot" ? robot_preset() : sim_preset();
  for (const auto& [key, val] : fac_keys) {
    std::string ctx = "[fac] " + key;
    FacConfig& f = cfg.fac;
    if (key == "alpha") f.alpha = detail::parse_double(val, ctx);
    else if (key == "beta") f.beta = detail::parse_double(val, ctx);
    else if (key == "sigma_hat") f.sigma_hat = detail::parse_double(val, ctx);
    else if (key == "explore_start") f.explore_start = detail::parse_double(val, ctx);
    else if (key == "explore_end") f.explore_end = detail::parse_double(val, ctx);
    else if (key == "explore_decay_frames") f.explore_decay_frames = detail::parse_long(val, ctx);
    else if (key == "noise_clip") f.noise_clip = detail::parse_double(val, ctx);
    else if (key == "nstep") f.nstep = static_cast<int>(detail::parse_long(val, ctx));
    else if (key == "gamma") f.gamma = detail::parse_double(val, ctx);
    else if (key == "lambda_success") f.lambda_success = detail::parse_double(val, ctx);
    else if (key == "batch_size") f.batch_size = static_cast<int>(detail::parse_long(val, ctx));
    else if (key == "replay_capacity") f.replay_capacity = detail::parse_long(val, ctx);
    else if (key == "success_capacity") f.success_capacity = static_cast<int>(detail::parse_long(val, ctx));
    else if (key == "utd_ratio") f.utd_ratio = static_cast<int>(detail::parse_long(val, ctx));
    else if (key == "warmup_unit") {
      if (val == "frames") f.warmup_unit = WarmupUnit::frames;
      else if (val == "trajectories") f.warmup_unit = WarmupUnit::trajectories;
      else throw detail::ConfigError(ctx + ": expected frames|trajectories");
    }
    else if (key == "warmup_trajectories") f.warmup_trajectories = static_cast<int>(detail::parse_long(val, ctx));
    else if (key == "seed_frames") f.seed_frames = detail::parse_long(val, ctx);
    else if (key == "target_tau") f.target_tau = detail::parse_double(val, ctx);
    else if (key == "better_action") f.better_action = detail::parse_bool(val, ctx);
    else if (key == "layer_norm") f.layer_norm = detail::parse_bool(val, ctx);
    else if (key == "learning_rate") f.learning_rate = detail::parse_double(val, ctx);
    else if (key == "use_policy_prior") f.use_policy_prior = detail::parse_bool(val, ctx);
    else if (key == "use_value_prior") f.use_value_prior = detail::parse_bool(val, ctx);
    else if (key == "use_success_reward") f.use_success_reward = detail::parse_bool(val, ctx);
    else if (key == "use_success_buffer") f.use_success_buffer = detail::parse_bool(val, ctx);
    else throw detail::ConfigError("unknown key '" + key + "' in [fac]");
  }

  env_task_id(cfg.env_name);  // validates the environment name
  validate_config(cfg.fac);
  if (cfg.seeds.empty()) throw detail::ConfigError("[run] seeds must be non-empty");
  if (cfg.total_frames < cfg.eval_interval)
    throw detail::ConfigError("[run] total_frames must be >= eval_interval");
  if (cfg.eval_episodes < 1)
    throw detail::ConfigError("[run] eval_episodes must be >= 1");
  if (cfg.output_dir.empty()) {
    const char* root = std::getenv("FAC_OUTPUT_DIR");
    cfg.output_dir = root != nullptr ? root : "runs";
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_config_text(ss.str());
}

inline std::string save_config_text(const RunConfig& cfg) {
  std::ostringstream o;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& t : v) s += (s.empty() ? "" : " ") + t;
    return s;
  };
  o << "[env]\nname = " << cfg.env_name << "\n\n";
  o << "[priors]\n";
  o << "policy = " << cfg.priors.policy << "\n";
  o << "value = " << cfg.priors.value << "\n";
  o << "success = " << cfg.priors.success << "\n";
  if (!cfg.priors.policy_corruption.empty())
    o << "policy_corruption = " << join(cfg.priors.policy_corruption) << "\n";
  if (!cfg.priors.value_corruption.empty())
    o << "value_corruption = " << join(cfg.priors.value_corruption) << "\n";
  if (!cfg.priors.success_corruption.empty())
    o << "success_corruption = " << join(cfg.priors.success_corruption) << "\n";
  o << "corruption_seed = " << cfg.priors.corruption_seed << "\n\n";
  const FacConfig& f = cfg.fac;
  o << "[fac]\n";
  o << "preset = " << cfg.preset << "\n";
  o << "alpha = " << detail::fmt_double(f.alpha) << "\n";
  o << "beta = " << detail::fmt_double(f.beta) << "\n";
  o << "sigma_hat = " << detail::fmt_double(f.sigma_hat) << "\n";
  o << "explore_start = " << detail::fmt_double(f.explore_start) << "\n";
  o << "explore_end = " << detail::fmt_double(f.explore_end) << "\n";
  o << "explore_decay_frames = " << f.explore_decay_frames << "\n";
  o << "noise_clip = " << detail::fmt_double(f.noise_clip) << "\n";
  o << "nstep = " << f.nstep << "\n";
  o << "gamma = " << detail::fmt_double(f.gamma) << "\n";
  o << "lambda_success = " << detail::fmt_double(f.lambda_success) << "\n";
  o << "batch_size = " << f.batch_size << "\n";
  o << "replay_capacity = " << f.replay_capacity << "\n";
  o << "success_capacity = " << f.success_capacity << "\n";
  o << "utd_ratio = " << f.utd_ratio << "\n";
  o << "warmup_unit = "
    << (f.warmup_unit == WarmupUnit::frames ? "frames" : "trajectories") << "\n";
  o << "warmup_trajectories = " << f.warmup_trajectories << "\n";
  o << "seed_frames = " << f.seed_frames << "\n";
  o << "target_tau = " << detail::fmt_double(f.target_tau) << "\n";
  o << "better_action = " << (f.better_action ? "true" : "false") << "\n";
  o << "layer_norm = " << (f.layer_norm ? "true" : "false") << "\n";
  o << "learning_rate = " << detail::fmt_double(f.learning_rate) << "\n";
  o << "use_policy_prior = " << (f.use_policy_prior ? "true" : "false") << "\n";
  o << "use_value_prior = " << (f.use_value_prior ? "true" : "false") << "\n";
  o << "use_success_reward = " << (f.use_success_reward ? "true" : "false") << "\n";
  o << "use_success_buffer = " << (f.use_success_buffer ? "true" : "false") << "\n\n";
  o << "[run]\n";
  o << "seeds =";
  for (auto s : cfg.seeds) o << " " << s;
  o << "\n";
  o << "total_frames = " << cfg.total_frames << "\n";
  o << "eval_interval = " << cfg.eval_interval << "\n";
  o << "eval_episodes = " << cfg.eval_episodes << "\n";
  o << "output_dir = " << cfg.output_dir << "\n";
  return o.str();
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_config: cannot open " + path);
  f << save_config_text(cfg);
}

// Hash over everything that defines the experiment semantics; seeds and the
// output directory are excluded so sibling seed runs of one experiment share
// a hash.
inline std::string config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.seeds = {0};
  c.output_dir = "-";
  std::string s = save_config_text(c);
  std::uint64_t h = fnv1a64(s);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Builds the prior bundle: base oracle (or null) providers, then the ordered
// corruption list. Wrapper seeds are drawn from one stream seeded with
// corruption_seed, in the order policy, value, success.
inline PriorBundle build_priors(const RunConfig& cfg, const EnvSpec& spec) {
  PriorBundle b;
  b.policy = cfg.priors.policy == "oracle" ? oracle_policy_prior(spec)
                                           : null_policy_prior(spec.action_dim);
  b.value = cfg.priors.value == "oracle" ? oracle_value_prior(spec)
                                         : null_value_prior();
  b.success = cfg.priors.success == "oracle" ? oracle_success_prior(spec)
                                             : null_success_prior();
  RngStream corr(cfg.priors.corruption_seed);

  auto split_tok = [](const std::string& tok) {
    std::vector<std::string> parts;
    std::stringstream ss(tok);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    return parts;
  };

  for (const auto& tok : cfg.priors.policy_corruption) {
    auto parts = split_tok(tok);
    if (parts[0] == "discretize" && parts.size() == 1) {
      b.policy = discretize_policy(b.policy);
    } else if (parts[0] == "uniform" && parts.size() == 2) {
      b.policy = corrupt_policy_uniform(
          b.policy, detail::parse_double(parts[1], "uniform"), corr);
    } else if (parts[0] == "invert" && parts.size() == 2) {
      b.policy = corrupt_policy_invert(
          b.policy, detail::parse_double(parts[1], "invert"), corr);
    } else {
      throw detail::ConfigError("unknown policy corruption '" + tok + "'");
    }
  }
  double noise_std = 0.0;
  int quant = 0;
  bool have_value_corruption = false;
  for (const auto& tok : cfg.priors.value_corruption) {
    auto parts = split_tok(tok);
    if (parts[0] == "noise" && parts.size() == 2) {
      noise_std = detail::parse_double(parts[1], "noise");
      have_value_corruption = true;
    } else if (parts[0] == "quant" && parts.size() == 2) {
      quant = static_cast<int>(detail::parse_long(parts[1], "quant"));
      have_value_corruption = true;
    } else {
      throw detail::ConfigError("unknown value corruption '" + tok + "'");
    }
  }
  if (have_value_corruption) b.value = corrupt_value(b.value, noise_std, quant, corr);
  for (const auto& tok : cfg.priors.success_corruption) {
    auto parts = split_tok(tok);
    if (parts[0] == "flip" && parts.size() == 3) {
      b.success = corrupt_success(b.success,
                                  detail::parse_double(parts[1], "flip fp"),
                                  detail::parse_double(parts[2], "flip fn"), corr);
    } else {
      throw detail::ConfigError("unknown success corruption '" + tok + "'");
    }
  }
  return b;
}

inline const char* kMetricsHeader =
    "frame,success_rate,actor_loss,critic_loss,reg_term,succ_term,"
    "actor_action_fraction,seed,config_hash";

struct ParsedMetrics {
  std::vector<EvalPoint> points;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Tolerates a truncated final line (a killed run leaves earlier rows intact).
inline ParsedMetrics parse_metrics_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("parse_metrics_csv: cannot open " + path);
  ParsedMetrics out;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (first) {
      first = false;
      continue;  // header
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) continue;  // incomplete trailing row
    try {
      EvalPoint p;
      p.frame = std::stol(cells[0]);
      p.success_rate = std::stod(cells[1]);
      p.actor_loss = std::stod(cells[2]);
      p.critic_loss = std::stod(cells[3]);
      p.reg_term = std::stod(cells[4]);
      p.succ_term = std::stod(cells[5]);
      p.actor_action_fraction = std::stod(cells[6]);
      out.seed = static_cast<std::uint64_t>(std::stoll(cells[7]));
      out.config_hash = cells[8];
      out.points.push_back(p);
    } catch (...) {
      continue;
    }
  }
  return out;
}

// One seed of one experiment: train, streaming each eval row to
// <dir>/metrics.csv (append + flush per row), final actor checkpoint, and a
// machine-readable summary.
inline RunResult run_single(const RunConfig& cfg, std::uint64_t seed,
                            const fs::path& dir) {
  fs::create_directories(dir);
  std::string hash = config_hash(cfg);
  auto env = make_env(cfg.env_name, derive_seed(seed, "env-make"));
  PriorBundle bundle = build_priors(cfg, env->spec());

  std::ofstream csv(dir / "metrics.csv");
  if (!csv) throw std::runtime_error("cannot open metrics.csv in " + dir.string());
  csv << kMetricsHeader << "\n";
  csv.flush();

  TrainOptions opt;
  opt.total_frames = cfg.total_frames;
  opt.eval_interval = cfg.eval_interval;
  opt.eval_episodes = cfg.eval_episodes;
  opt.checkpoint_path = (dir / "actor.ckpt").string();
  opt.on_eval = [&](const EvalPoint& p) {
    csv << p.frame << ',' << detail::fmt_metric(p.success_rate) << ','
        << detail::fmt_metric(p.actor_loss) << ','
        << detail::fmt_metric(p.critic_loss) << ','
        << detail::fmt_metric(p.reg_term) << ','
        << detail::fmt_metric(p.succ_term) << ','
        << detail::fmt_metric(p.actor_action_fraction) << ',' << seed << ','
        << hash << "\n";
    csv.flush();
  };

  RunResult res = train(*env, bundle, cfg.fac, seed, opt);
  res.config_hash = hash;

  nlohmann::json summary;
  summary["seed"] = seed;
  summary["config_hash"] = hash;
  summary["env"] = cfg.env_name;
  summary["total_frames"] = cfg.total_frames;
  summary["eval_points"] = res.points.size();
  summary["final_success_rate"] =
      res.points.empty() ? 0.0 : res.points.back().success_rate;
  summary["checkpoint"] = res.checkpoint_path;
  summary["policy_prior"] = bundle.policy.provenance;
  summary["value_prior"] = bundle.value.provenance;
  summary["success_prior"] = bundle.success.provenance;
  std::ofstream js(dir / "summary.json");
  js << summary.dump(2) << "\n";
  return res;
}

inline fs::path seed_dir(const RunConfig& cfg, std::uint64_t seed) {
  return fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
}

// Runs every seed (sequentially, or as forked shared-nothing processes with
// parallel = true), then writes the seed-mean aggregate curve. Per-seed
// failures do not abort sibling seeds; they are re-raised at the end.
inline std::vector<RunResult> run(const RunConfig& cfg, bool parallel = false) {
  fs::create_directories(cfg.output_dir);
  save_config(cfg, (fs::path(cfg.output_dir) / "config.ini").string());
  std::vector<std::string> failures;

  if (!parallel) {
    for (auto seed : cfg.seeds) {
      try {
        run_single(cfg, seed, seed_dir(cfg, seed));
      } catch (const std::exception& e) {
        failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
      }
    }
  } else {
    std::vector<pid_t> kids;
    for (auto seed : cfg.seeds) {
      pid_t pid = fork();
      if (pid == 0) {
        try {
          run_single(cfg, seed, seed_dir(cfg, seed));
          _exit(0);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "seed %llu failed: %s\n",
                       static_cast<unsigned long long>(seed), e.what());
          _exit(1);
        }
      }
      kids.push_back(pid);
    }
    for (std::size_t i = 0; i < kids.size(); ++i) {
      int status = 0;
      waitpid(kids[i], &status, 0);
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        failures.push_back("seed " + std::to_string(cfg.seeds[i]) + " failed");
    }
  }

  // Reload from disk so sequential and parallel modes share one code path.
  std::vector<RunResult> results;
  std::map<long, std::pair<double, int>> agg;  // frame -> (sum, count)
  for (auto seed : cfg.seeds) {
    fs::path mpath = seed_dir(cfg, seed) / "metrics.csv";
    if (!fs::exists(mpath)) continue;
    ParsedMetrics pm = parse_metrics_csv(mpath.string());
    RunResult r;
    r.seed = seed;
    r.config_hash = pm.config_hash;
    r.points = pm.points;
    r.checkpoint_path = (seed_dir(cfg, seed) / "actor.ckpt").string();
    for (const auto& p : pm.points) {
      agg[p.frame].first += p.success_rate;
      agg[p.frame].second += 1;
    }
    results.push_back(std::move(r));
  }
  std::ofstream aggf(fs::path(cfg.output_dir) / "aggregate.csv");
  aggf << "frame,mean_success_rate,n_seeds\n";
  for (const auto& [frame, sc] : agg)
    aggf << frame << ',' << detail::fmt_metric(sc.first / sc.second) << ','
         << sc.second << "\n";

  if (!failures.empty()) {
    std::string msg = "run: some seeds failed:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  return results;
}

// Named ablation suites; each entry differs from the base only in the
// switches/corruptions that define it, and writes to its own subdirectory.
inline std::vector<std::pair<std::string, RunConfig>> ablation_suite(
    const std::string& name, const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> out;
  auto derived = [&](const std::string& label) {
    RunConfig c = base;
    c.output_dir = (fs::path(base.output_dir) / label).string();
    return std::make_pair(label, c);
  };
  if (name == "priors") {
    out.push_back(derived("full"));
    out.push_back(derived("no-policy"));
    out.back().second.fac.use_policy_prior = false;
    out.push_back(derived("no-value"));
    out.back().second.fac.use_value_prior = false;
    out.push_back(derived("no-reward"));
    out.back().second.fac.use_success_reward = false;
    out.push_back(derived("no-success-buffer"));
    out.back().second.fac.use_success_buffer = false;
  } else if (name == "policy-noise") {
    out.push_back(derived("clean"));
    out.push_back(derived("discretized"));
    out.back().second.priors.policy_corruption = {"discretize"};
    out.push_back(derived("discretized-uniform20"));
    out.back().second.priors.policy_corruption = {"discretize", "uniform:0.2"};
    out.push_back(derived("discretized-uniform50"));
    out.back().second.priors.policy_corruption = {"discretize", "uniform:0.5"};
    out.push_back(derived("invert20"));
    out.back().second.priors.policy_corruption = {"invert:0.2"};
    out.push_back(derived("invert50"));
    out.back().second.priors.policy_corruption = {"invert:0.5"};
  } else if (name == "success-noise") {
    out.push_back(derived("clean"));
    out.push_back(derived("noisy-success"));
    out.back().second.priors.success_corruption = {"flip:0.017:0.099"};
    out.push_back(derived("no-reward"));
    out.back().second.fac.use_success_reward = false;
  } else {
    throw std::invalid_argument(
        "unknown ablation suite '" + name +
        "'; available: priors, policy-noise, success-noise");
  }
  return out;
}

inline double curve_auc(const std::vector<std::pair<long, double>>& curve) {
  double auc = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    auc += 0.5 * (curve[i].second + curve[i - 1].second) *
           static_cast<double>(curve[i].first - curve[i - 1].first);
  return auc;
}

struct ReportRow {
  std::string config;  // directory relative to the report root
  std::string config_hash;
  int n_seeds = 0;
  double final_success = 0.0;
  long frames_to_90 = -1;  // -1: never reached
  double auc = 0.0;
};

// Scans a results tree for seed_*/metrics.csv groups and summarizes each
// experiment directory; mixed config hashes inside one experiment directory
// are an error.
inline std::vector<ReportRow> report(const std::string& results_dir) {
  fs::path root(results_dir);
  if (!fs::exists(root)) throw std::runtime_error("report: no such directory " + results_dir);
  std::map<std::string, std::vector<ParsedMetrics>> groups;
  for (auto it = fs::recursive_directory_iterator(root);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file() || it->path().filename() != "metrics.csv") continue;
    fs::path group = it->path().parent_path().parent_path();
    ParsedMetrics pm = parse_metrics_csv(it->path().string());
    if (pm.points.empty()) continue;
    groups[fs::relative(group, root).string()].push_back(std::move(pm));
  }
  if (groups.empty())
    throw std::runtime_error("report: no metrics found under " + results_dir);

  std::vector<ReportRow> rows;
  for (auto& [name, metrics] : groups) {
    ReportRow row;
    row.config = name == "." ? "(root)" : name;
    row.config_hash = metrics.front().config_hash;
    row.n_seeds = static_cast<int>(metrics.size());
    for (const auto& m : metrics)
      if (m.config_hash != row.config_hash)
        throw std::runtime_error("report: mixed config hashes in '" + name +
                                 "' (" + m.config_hash + " vs " +
                                 row.config_hash + ")");
    std::map<long, std::pair<double, int>> agg;
    for (const auto& m : metrics)
      for (const auto& p : m.points) {
        agg[p.frame].first += p.success_rate;
        agg[p.frame].second += 1;
      }
    std::vector<std::pair<long, double>> curve;
    for (const auto& [frame, sc] : agg)
      if (sc.second == row.n_seeds)
        curve.emplace_back(frame, sc.first / sc.second);
    if (curve.empty()) continue;
    row.final_success = curve.back().second;
    for (const auto& [frame, rate] : curve)
      if (rate >= 0.9) {
        row.frames_to_90 = frame;
        break;
      }
    row.auc = curve_auc(curve);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string report_table(const std::vector<ReportRow>& rows) {
  std::ostringstream o;
  o << "config                          seeds  final  frames_to_90        auc\n";
  for (const auto& r : rows) {
    char buf[160];
    std::string f90 = r.frames_to_90 < 0 ? "-" : std::to_string(r.frames_to_90);
    std::snprintf(buf, sizeof(buf), "%-30s %6d %6.3f %13s %10.1f\n",
                  r.config.c_str(), r.n_seeds, r.final_success, f90.c_str(),
                  r.auc);
    o << buf;
  }
  return o.str();
}

inline std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream o;
  o << "config,config_hash,n_seeds,final_success,frames_to_90,auc\n";
  for (const auto& r : rows)
    o << r.config << ',' << r.config_hash << ',' << r.n_seeds << ','
      << detail::fmt_metric(r.final_success) << ',' << r.frames_to_90 << ','
      << detail::fmt_metric(r.auc) << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Verification suites (also exposed as `fac verify ...`).

struct ShapingSuiteRow {
  std::uint64_t seed = 0;
  int n_states = 0;
  int n_actions = 0;
  double max_q_deviation = 0.0;
  bool policy_agreement = true;
};

inline std::vector<ShapingSuiteRow> run_shaping_suite(int instances,
                                                      int max_states,
                                                      RngSeed seed,
                                                      double tol = 1e-6) {
  if (instances < 1 || max_states < 2)
    throw std::invalid_argument("run_shaping_suite: bad parameters");
  std::vector<ShapingSuiteRow> rows;
  RngStream meta(derive_seed(seed, "shaping-suite"));
  for (int i = 0; i < instances; ++i) {
    ShapingSuiteRow row;
    row.seed = meta.next_u64();
    RngStream rng(row.seed);
    row.n_states = 2 + static_cast<int>(rng.below(max_states - 1));
    row.n_actions = 1 + static_cast<int>(rng.below(5));
    int branching = 1 + static_cast<int>(rng.below(
                            std::min(4, row.n_states)));
    TabularMDP m = random_mdp(rng, row.n_states, row.n_actions, branching);
    Potential phi = random_potential(rng, m);
    ShapingReport rep = verify_shaping_theorem(m, phi, tol);
    row.max_q_deviation = rep.max_q_deviation;
    row.policy_agreement = rep.policy_agreement;
    rows.push_back(row);
  }
  return rows;
}

inline std::string shaping_suite_csv(const std::vector<ShapingSuiteRow>& rows) {
  std::ostringstream o;
  o << "seed,n_states,n_actions,max_q_deviation,policy_agreement\n";
  for (const auto& r : rows)
    o << r.seed << ',' << r.n_states << ',' << r.n_actions << ','
      << detail::fmt_metric(r.max_q_deviation) << ','
      << (r.policy_agreement ? 1 : 0) << "\n";
  return o.str();
}

struct MixingSuiteRow {
  int instance = 0;
  std::string check;  // identity | lower_bound | upper_equality
  int support = 0;
  double beta = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_error = 0.0;
  bool bound_satisfied = true;
};

inline std::vector<MixingSuiteRow> run_mixing_suite(int instances,
                                                    RngSeed seed) {
  if (instances < 1) throw std::invalid_argument("run_mixing_suite: instances");
  std::vector<MixingSuiteRow> rows;
  RngStream rng(derive_seed(seed, "mixing-suite"));
  for (int i = 0; i < instances; ++i) {
    int support = 2 + static_cast<int>(rng.below(39));
    double beta = rng.uniform(0.0, 10.0);
    DiscreteDist pi_hat = random_dist(rng, support);
    DiscreteDist m_pi = random_dist(rng, support);
    DiscreteDist pi_opt = random_dist(rng, support);

    MixReport ident = verify_mixing_identity(pi_hat, m_pi, beta);
    rows.push_back({i, "identity", support, beta, ident.lhs, ident.rhs,
                    ident.abs_error, true});
    MixReport lower = verify_bounds(pi_opt, m_pi, pi_hat, beta);
    rows.push_back({i, "lower_bound", support, beta, lower.lhs, lower.rhs,
                    lower.abs_error, lower.bound_satisfied});
    MixReport upper = verify_bounds(pi_opt, m_pi, pi_opt, beta);
    rows.push_back({i, "upper_equality", support, beta, upper.lhs,
                    beta / (1.0 + beta) * tv_sup(pi_opt, m_pi),
                    upper.abs_error, upper.bound_satisfied});
  }
  return rows;
}

inline std::string mixing_suite_csv(const std::vector<MixingSuiteRow>& rows) {
  std::ostringstream o;
  o << "instance,check,support,beta,lhs,rhs,abs_error,bound_satisfied\n";
  for (const auto& r : rows)
    o << r.instance << ',' << r.check << ',' << r.support << ','
      << detail::fmt_metric(r.beta) << ',' << detail::fmt_metric(r.lhs) << ','
      << detail::fmt_metric(r.rhs) << ',' << detail::fmt_metric(r.abs_error)
      << ',' << (r.bound_satisfied ? 1 : 0) << "\n";
  return o.str();
}

}  // namespace fac
