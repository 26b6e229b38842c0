// sfmab: run bandit experiments, verify the solver properties, time the solvers.
//
//   sfmab run    --policy opt2 --adversary bernoulli-gap --arms 10 --rounds 4096 --seeds 20
//   sfmab verify [--seed S] [--json]
//   sfmab bench  [--arms 2,10,100] [--rounds R]
//
// Every option may also come from --config FILE.json, keyed by the long flag
// name without dashes; flags given on the command line win.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfmab/adversaries.hpp"
#include "sfmab/bandit.hpp"
#include "sfmab/format.hpp"
#include "sfmab/harness.hpp"
#include "sfmab/simplex.hpp"
#include "sfmab/verification.hpp"

namespace {

constexpr const char* kOutDirEnv = "SFMAB_OUT_DIR";
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw sfmab::IoError("cannot open config '" + path + "'");
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw sfmab::PreconditionError("config '" + path + "' is not a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw sfmab::PreconditionError("config '" + path + "': " + e.what());
  }
}

// Fills `target` from the config file unless the flag was given explicitly.
template <class T>
void fill(const nlohmann::json& cfg, const CLI::Option* opt, T& target) {
  const std::string key = opt->get_name(false, true).substr(2);
  if (opt->count() > 0 || !cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw sfmab::PreconditionError("config key '" + key + "': " + e.what());
  }
}

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? env : "sfmab_out";
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string policy = "opt2";
  double scale = 1.0;
  std::string adversary = "bernoulli-gap";
  std::size_t arms = 10;
  std::size_t rounds = 4096;
  std::uint64_t adversary_seed = 1;
  double gap = 0.3;
  std::size_t sparsity = 1;
  double magnitude = 100.0;
  double density = 1.0;
  std::size_t period = 1000;
  double factor = 1.0;
  std::size_t seeds = 20;
  std::uint64_t first_seed = 1;
  std::vector<std::uint64_t> seed_list;
  std::string losses;
  std::string export_losses;
  std::string out_dir;
  unsigned threads = 0;
  bool no_traces = false;
};

struct RunOptions {
  CLI::Option* policy;
  CLI::Option* scale;
  CLI::Option* adversary;
  CLI::Option* arms;
  CLI::Option* rounds;
  CLI::Option* adversary_seed;
  CLI::Option* gap;
  CLI::Option* sparsity;
  CLI::Option* magnitude;
  CLI::Option* density;
  CLI::Option* period;
  CLI::Option* factor;
  CLI::Option* seeds;
  CLI::Option* first_seed;
  CLI::Option* seed_list;
  CLI::Option* losses;
  CLI::Option* export_losses;
  CLI::Option* out_dir;
  CLI::Option* threads;
  CLI::Option* no_traces;
};

RunOptions add_run_options(CLI::App& cmd, RunArgs& a) {
  RunOptions o;
  cmd.add_option("--config", a.config, "JSON file of option defaults");
  o.policy = cmd.add_option("--policy", a.policy, "opt1 | opt2 | exp3")->capture_default_str();
  o.scale = cmd.add_option("--scale", a.scale, "exp3 loss scale G")->capture_default_str();
  o.adversary = cmd.add_option("--adversary", a.adversary,
                               "zero | bounded-uniform | bernoulli-gap | sparse-heavy | "
                               "sign-mixed | drifting-best-arm")
                    ->capture_default_str();
  o.arms = cmd.add_option("--arms", a.arms, "number of arms n")->capture_default_str();
  o.rounds = cmd.add_option("--rounds", a.rounds, "horizon T")->capture_default_str();
  o.adversary_seed =
      cmd.add_option("--adversary-seed", a.adversary_seed, "seed of the loss matrix")
          ->capture_default_str();
  o.gap = cmd.add_option("--gap", a.gap, "gap for bernoulli-gap, sign-mixed, drifting-best-arm")
              ->capture_default_str();
  o.sparsity = cmd.add_option("--sparsity", a.sparsity, "sparse-heavy: arms hit per active round")
                   ->capture_default_str();
  o.magnitude = cmd.add_option("--magnitude", a.magnitude, "sparse-heavy, sign-mixed: loss magnitude")
                    ->capture_default_str();
  o.density = cmd.add_option("--density", a.density, "sparse-heavy: fraction of active rounds")
                  ->capture_default_str();
  o.period = cmd.add_option("--period", a.period, "drifting-best-arm: rounds per best arm")
                 ->capture_default_str();
  o.factor = cmd.add_option("--factor", a.factor, "multiply every loss by this factor")
                 ->capture_default_str();
  o.seeds = cmd.add_option("--seeds", a.seeds, "number of learner seeds")->capture_default_str();
  o.first_seed = cmd.add_option("--first-seed", a.first_seed, "first learner seed")
                     ->capture_default_str();
  o.seed_list = cmd.add_option("--seed-list", a.seed_list, "explicit learner seeds")->delimiter(',');
  o.losses = cmd.add_option("--losses", a.losses, "read the loss matrix from CSV instead");
  o.export_losses = cmd.add_option("--export-losses", a.export_losses, "write the loss matrix as CSV");
  o.out_dir = cmd.add_option("--out-dir", a.out_dir,
                             std::string("output directory (default $") + kOutDirEnv +
                                 " or ./sfmab_out)");
  o.threads = cmd.add_option("--threads", a.threads, "worker threads, 0 for all cores");
  o.no_traces = cmd.add_flag("--no-traces", a.no_traces, "write the summary only");
  return o;
}

void apply_config(const nlohmann::json& cfg, const RunOptions& o, RunArgs& a) {
  fill(cfg, o.policy, a.policy);
  fill(cfg, o.scale, a.scale);
  fill(cfg, o.adversary, a.adversary);
  fill(cfg, o.arms, a.arms);
  fill(cfg, o.rounds, a.rounds);
  fill(cfg, o.adversary_seed, a.adversary_seed);
  fill(cfg, o.gap, a.gap);
  fill(cfg, o.sparsity, a.sparsity);
  fill(cfg, o.magnitude, a.magnitude);
  fill(cfg, o.density, a.density);
  fill(cfg, o.period, a.period);
  fill(cfg, o.factor, a.factor);
  fill(cfg, o.seeds, a.seeds);
  fill(cfg, o.first_seed, a.first_seed);
  fill(cfg, o.seed_list, a.seed_list);
  fill(cfg, o.losses, a.losses);
  fill(cfg, o.export_losses, a.export_losses);
  fill(cfg, o.out_dir, a.out_dir);
  fill(cfg, o.threads, a.threads);
  fill(cfg, o.no_traces, a.no_traces);
}

int run_command(const RunArgs& a) {
  const sfmab::PolicySpec spec{sfmab::parse_policy_kind(a.policy), a.scale};
  const std::vector<std::uint64_t> seeds =
      a.seed_list.empty() ? sfmab::seed_range(a.first_seed, a.seeds) : a.seed_list;
  const sfmab::ExperimentOptions options{a.threads, !a.no_traces};

  sfmab::Experiment exp;
  if (!a.losses.empty()) {
    sfmab::LossMatrix m = sfmab::load_csv(a.losses);
    if (a.factor != 1.0) {
      for (std::size_t t = 0; t < m.rounds(); ++t) {
        for (double& x : m.row(t)) x *= a.factor;
      }
    }
    if (!a.export_losses.empty()) sfmab::save_csv(a.export_losses, m);
    exp = sfmab::run_experiment(spec, m, seeds, options);
    exp.summary.source = a.losses;
  } else {
    sfmab::AdversaryConfig c;
    c.kind = sfmab::parse_adversary_kind(a.adversary);
    if (c.kind == sfmab::AdversaryKind::kRescaled) {
      throw sfmab::PreconditionError("use --factor to rescale an adversary");
    }
    c.arms = a.arms;
    c.rounds = a.rounds;
    c.seed = a.adversary_seed;
    c.gap = a.gap;
    c.sparsity = a.sparsity;
    c.magnitude = a.magnitude;
    c.density = a.density;
    c.period = a.period;
    if (a.factor != 1.0) c = sfmab::rescaled(c, a.factor);
    if (!a.export_losses.empty()) sfmab::save_csv(a.export_losses, sfmab::generate(c));
    exp = sfmab::run_experiment(spec, c, seeds, options);
  }

  const std::string out_dir = a.out_dir.empty() ? default_out_dir() : a.out_dir;
  const auto files = sfmab::emit(exp, out_dir);
  const sfmab::RegretSummary& s = exp.summary;
  std::cout << "policy: " << s.policy << "\n"
            << "arms: " << s.arms << "\n"
            << "rounds: " << s.rounds << "\n"
            << "seeds: " << s.seeds.size() << "\n"
            << "mean_regret: " << sfmab::format_double(s.mean_regret) << "\n"
            << "std_error: " << sfmab::format_double(s.std_error) << "\n"
            << "bound_horizon: " << sfmab::format_double(s.bound_horizon) << "\n"
            << "bound_data: " << sfmab::format_double(s.bound_data) << "\n"
            << "ratio_horizon: " << sfmab::format_double(s.ratio_horizon) << "\n"
            << "ratio_data: " << sfmab::format_double(s.ratio_data) << "\n"
            << "summary: " << files.front().string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string config;
  std::uint64_t seed = 20240601;
  bool json = false;
};

int verify_command(const VerifyArgs& a) {
  const auto results = sfmab::run_property_suites(a.seed);
  bool ok = true;
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    ok = ok && r.passed;
    if (a.json) {
      out.push_back({{"check", r.name}, {"passed", r.passed}, {"cases", r.cases},
                     {"worst", r.worst}, {"limit", r.limit}, {"seconds", r.seconds},
                     {"detail", r.detail}});
    } else {
      std::printf("%s  %-32s cases=%-6zu worst=%-12.4g limit=%-9.3g %s\n",
                  r.passed ? "PASS" : "FAIL", r.name.c_str(), r.cases, r.worst, r.limit,
                  r.detail.c_str());
    }
  }
  if (a.json) std::cout << out.dump(2) << "\n";
  return ok ? 0 : kExitFailure;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::vector<std::size_t> arms{2, 10, 100, 1000};
  std::size_t rounds = 2000;
  std::uint64_t seed = 1;
};

int bench_command(const BenchArgs& a) {
  std::printf("%-6s %-8s %14s %14s %14s\n", "arms", "rounds", "normalize_us", "gap_us", "round_us");
  for (std::size_t n : a.arms) {
    sfmab::AdversaryConfig c;
    c.kind = sfmab::AdversaryKind::kBoundedUniform;
    c.arms = n;
    c.rounds = a.rounds;
    c.seed = a.seed;
    const sfmab::LossMatrix m = sfmab::generate(c);

    sfmab::ScaleFreeBandit policy(n, sfmab::Exploration::kAdaptive, a.seed);
    std::vector<sfmab::SimplexPoint> iterates;
    std::vector<double> etas;
    iterates.reserve(a.rounds);
    auto start = std::chrono::steady_clock::now();
    for (std::size_t t = 0; t < a.rounds; ++t) {
      iterates.push_back(policy.state().ftrl.current);
      etas.push_back(policy.state().ftrl.eta);
      policy.play(m.row(t));
    }
    const double round_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // The two solver calls in isolation, on the iterates the run produced.
    start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (std::size_t t = 0; t < a.rounds; ++t) {
      sink += sfmab::mixability_gap<sfmab::LogBarrier>(iterates[t], m.row(t), etas[t]).value;
    }
    const double gap_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    sfmab::CumulativeLoss cum(n);
    start = std::chrono::steady_clock::now();
    for (std::size_t t = 0; t < a.rounds; ++t) {
      cum.add(m.row(t));
      sink += sfmab::ftrl_iterate<sfmab::LogBarrier>(etas[t], cum)[0];
    }
    const double norm_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double per = 1e6 / static_cast<double>(a.rounds);
    std::printf("%-6zu %-8zu %14.3f %14.3f %14.3f\n", n, a.rounds, norm_s * per, gap_s * per,
                round_s * per);
    if (!(sink == sink)) return kExitFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-free adversarial bandits: experiments, verification, timing"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "replicated bandit runs against an adversary");
  const RunOptions run_opts = add_run_options(*run, run_args);

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "property suites for the solver layers");
  verify->add_option("--config", verify_args.config, "JSON file of option defaults");
  CLI::Option* verify_seed =
      verify->add_option("--seed", verify_args.seed, "base seed")->capture_default_str();
  CLI::Option* verify_json = verify->add_flag("--json", verify_args.json, "print results as JSON");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "per-round solver cost");
  bench->add_option("--config", bench_args.config, "JSON file of option defaults");
  CLI::Option* bench_arms =
      bench->add_option("--arms", bench_args.arms, "arm counts")->delimiter(',')->capture_default_str();
  CLI::Option* bench_rounds =
      bench->add_option("--rounds", bench_args.rounds, "rounds per arm count")->capture_default_str();
  CLI::Option* bench_seed = bench->add_option("--seed", bench_args.seed, "seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      apply_config(load_config(run_args.config), run_opts, run_args);
      return run_command(run_args);
    }
    if (verify->parsed()) {
      const auto cfg = load_config(verify_args.config);
      fill(cfg, verify_seed, verify_args.seed);
      fill(cfg, verify_json, verify_args.json);
      return verify_command(verify_args);
    }
    const auto cfg = load_config(bench_args.config);
    fill(cfg, bench_arms, bench_args.arms);
    fill(cfg, bench_rounds, bench_args.rounds);
    fill(cfg, bench_seed, bench_args.seed);
    return bench_command(bench_args);
  } catch (const sfmab::PreconditionError& e) {
    std::cerr << "sfmab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "sfmab: " << e.what() << "\n";
    return kExitFailure;
  }
}
