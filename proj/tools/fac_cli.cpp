// Command-line front end: training runs, checkpoint evaluation, ablation
// suites, the verification suites, and result reporting.

#include <iostream>

#include <CLI11.hpp>

#include "fac/harness.hpp"

namespace {

int cmd_train(const std::string& config_path, long seed_override,
              bool parallel) {
  fac::RunConfig cfg = fac::load_config(config_path);
  if (seed_override >= 0)
    cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  auto results = fac::run(cfg, parallel);
  for (const auto& r : results) {
    double final_rate = r.points.empty() ? 0.0 : r.points.back().success_rate;
    std::cout << "seed " << r.seed << ": " << r.points.size()
              << " eval points, final success " << final_rate << "\n";
  }
  std::cout << "results in " << cfg.output_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& env_name,
             int episodes, std::uint64_t seed) {
  fac::Mlp actor = fac::load_mlp(checkpoint);
  fac::EnvSpec spec = fac::make_env_spec(env_name);
  if (actor.in_dim() != spec.state_dim || actor.out_dim() != spec.action_dim)
    throw std::runtime_error("checkpoint dims do not match environment '" +
                             env_name + "'");
  double rate = fac::evaluate(
      [&actor](const fac::StateVec& s) { return fac::forward_one(actor, s); },
      env_name, episodes, seed);
  std::cout << "success_rate " << rate << " over " << episodes
            << " episodes\n";
  return 0;
}

int cmd_ablate(const std::string& suite, const std::string& config_path,
               bool parallel) {
  fac::RunConfig base = fac::load_config(config_path);
  auto configs = fac::ablation_suite(suite, base);
  for (const auto& [label, cfg] : configs) {
    std::cout << "== " << label << " -> " << cfg.output_dir << "\n";
    fac::run(cfg, parallel);
  }
  auto rows = fac::report(base.output_dir);
  std::cout << fac::report_table(rows);
  return 0;
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot open " + out_path);
  f << text;
  std::cout << "wrote " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"foundation-prior-guided actor-critic experiments"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "run training from a config file");
  std::string train_config;
  long seed_override = -1;
  bool train_parallel = false;
  train->add_option("--config", train_config, "config file path")->required();
  train->add_option("--seed-override", seed_override,
                    "run only this seed instead of the configured list");
  train->add_flag("--parallel", train_parallel,
                  "run seeds as separate processes");

  auto* eval = app.add_subcommand("eval", "evaluate a saved actor checkpoint");
  std::string eval_ckpt, eval_env;
  int eval_episodes = 10;
  std::uint64_t eval_seed = 7;
  eval->add_option("--checkpoint", eval_ckpt, "actor checkpoint")->required();
  eval->add_option("--env", eval_env, "environment name")->required();
  eval->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  auto* ablate = app.add_subcommand("ablate", "run an ablation suite");
  std::string ablate_suite, ablate_config;
  bool ablate_parallel = false;
  ablate->add_option("--suite", ablate_suite,
                     "priors | policy-noise | success-noise")->required();
  ablate->add_option("--config", ablate_config, "base config file")->required();
  ablate->add_flag("--parallel", ablate_parallel,
                   "run seeds as separate processes");

  auto* verify = app.add_subcommand("verify", "verification suites");
  verify->require_subcommand(1);
  auto* shaping = verify->add_subcommand(
      "shaping", "reward-shaping optimality on random tabular MDPs");
  int sh_instances = 200, sh_max_states = 25;
  std::uint64_t sh_seed = 0;
  std::string sh_out;
  shaping->add_option("--instances", sh_instances, "number of random MDPs");
  shaping->add_option("--max-states", sh_max_states, "max state count");
  shaping->add_option("--seed", sh_seed, "suite seed");
  shaping->add_option("--out", sh_out, "write CSV here instead of stdout");

  auto* mixing = verify->add_subcommand(
      "mixing", "policy-mixing identity and bounds on random distributions");
  int mx_instances = 1000;
  std::uint64_t mx_seed = 0;
  std::string mx_out;
  mixing->add_option("--instances", mx_instances, "number of random triples");
  mixing->add_option("--seed", mx_seed, "suite seed");
  mixing->add_option("--out", mx_out, "write CSV here instead of stdout");

  auto* rep = app.add_subcommand("report", "summarize a results directory");
  std::string rep_dir, rep_csv;
  rep->add_option("dir", rep_dir, "results directory")->required();
  rep->add_option("--csv", rep_csv, "also write the table as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_config, seed_override, train_parallel);
    if (*eval) return cmd_eval(eval_ckpt, eval_env, eval_episodes, eval_seed);
    if (*ablate) return cmd_ablate(ablate_suite, ablate_config, ablate_parallel);
    if (*shaping) {
      auto rows = fac::run_shaping_suite(sh_instances, sh_max_states, sh_seed);
      write_or_print(fac::shaping_suite_csv(rows), sh_out);
      int failures = 0;
      for (const auto& r : rows)
        if (r.max_q_deviation > 1e-6 || !r.policy_agreement) ++failures;
      std::cerr << rows.size() << " instances, " << failures << " failures\n";
      return failures == 0 ? 0 : 1;
    }
    if (*mixing) {
      auto rows = fac::run_mixing_suite(mx_instances, mx_seed);
      write_or_print(fac::mixing_suite_csv(rows), mx_out);
      int failures = 0;
      for (const auto& r : rows) {
        if (r.check == "identity" && r.abs_error > 1e-12) ++failures;
        if (!r.bound_satisfied) ++failures;
        if (r.check == "upper_equality" && r.abs_error > 1e-12) ++failures;
      }
      std::cerr << rows.size() << " checks, " << failures << " failures\n";
      return failures == 0 ? 0 : 1;
    }
    if (*rep) {
      auto rows = fac::report(rep_dir);
      std::cout << fac::report_table(rows);
      if (!rep_csv.empty()) write_or_print(fac::report_csv(rows), rep_csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
