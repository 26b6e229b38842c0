#ifndef SFMAB_HARNESS_HPP
#define SFMAB_HARNESS_HPP

// Replicated bandit runs against a fixed loss matrix.
//
// The adversary's matrix is drawn once from its own config; the seeds listed
// here drive only the learner, so the mean over seeds estimates the expected
// regret against an oblivious adversary. Regret is always measured on the
// true losses against the best fixed arm.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sfmab/adversaries.hpp"
#include "sfmab/bandit.hpp"
#include "sfmab/errors.hpp"
#include "sfmab/format.hpp"

namespace sfmab {

enum class PolicyKind { kScaleFreeOpt1, kScaleFreeOpt2, kExp3 };

struct PolicySpec {
  PolicyKind kind = PolicyKind::kScaleFreeOpt2;
  double scale = 1.0;  // G, read by exp3 only
};

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kScaleFreeOpt1: return "opt1";
    case PolicyKind::kScaleFreeOpt2: return "opt2";
    case PolicyKind::kExp3: return "exp3";
  }
  return "unknown";
}

inline PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "opt1" || name == "scale-free-opt1") return PolicyKind::kScaleFreeOpt1;
  if (name == "opt2" || name == "scale-free-opt2") return PolicyKind::kScaleFreeOpt2;
  if (name == "exp3") return PolicyKind::kExp3;
  throw PreconditionError("unknown policy '" + std::string(name) + "' (expected opt1, opt2, exp3)");
}

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::size_t arms,
                                           std::size_t horizon, std::uint64_t seed) {
  switch (spec.kind) {
    case PolicyKind::kScaleFreeOpt1:
      return std::make_unique<ScaleFreeBandit>(arms, Exploration::kNonAdaptive, seed);
    case PolicyKind::kScaleFreeOpt2:
      return std::make_unique<ScaleFreeBandit>(arms, Exploration::kAdaptive, seed);
    case PolicyKind::kExp3:
      return std::make_unique<Exp3>(arms, horizon, spec.scale, seed);
  }
  throw PreconditionError("make_policy: unknown policy");
}

struct RoundRecord {
  std::size_t t = 0;  // 1-based
  std::size_t arm = 0;
  double loss = 0.0;        // l_t(i_t)
  double gamma = 0.0;       // gamma_{t-1}; 0 for policies without forced exploration
  double eta = 0.0;         // eta_{t-1}
  double cum_regret = 0.0;  // sum_{s <= t} l_s(i_s) - min_i sum_{s <= t} l_s(i)
};

struct SeedRun {
  std::uint64_t seed = 0;
  double regret = 0.0;
  double incurred = 0.0;
  std::vector<RoundRecord> records;
};

struct RegretSummary {
  std::string policy;
  double scale = 0.0;  // exp3's G, 0 otherwise
  std::optional<AdversaryConfig> adversary;  // empty for imported matrices
  std::string source;                        // matrix path when imported
  std::size_t arms = 0;
  std::size_t rounds = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> regrets;  // in seed order
  double mean_regret = 0.0;
  double std_error = 0.0;
  LossNorms norms;
  std::size_t best_arm = 0;
  double best_loss = 0.0;
  double bound_horizon = 0.0;  // sqrt(n L2) + Linf sqrt(n T)
  double bound_data = 0.0;     // sqrt(n L2) + Linf sqrt(n L1)
  double ratio_horizon = 0.0;  // mean_regret / bound_horizon
  double ratio_data = 0.0;     // mean_regret / bound_data
};

struct Experiment {
  RegretSummary summary;
  std::vector<SeedRun> runs;  // in seed order
};

struct ExperimentOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool keep_records = true;
};

/// min_i sum_{s <= t} l_s(i) for every t.
inline std::vector<double> best_prefix_loss(const LossMatrix& m) {
  std::vector<double> sums(m.arms(), 0.0);
  std::vector<double> out(m.rounds());
  for (std::size_t t = 0; t < m.rounds(); ++t) {
    const auto row = m.row(t);
    for (std::size_t i = 0; i < m.arms(); ++i) sums[i] += row[i];
    out[t] = *std::min_element(sums.begin(), sums.end());
  }
  return out;
}

inline SeedRun run_seed(const PolicySpec& spec, const LossMatrix& losses,
                        std::span<const double> best_prefix, std::uint64_t seed,
                        bool keep_records = true) {
  std::unique_ptr<Policy> policy = make_policy(spec, losses.arms(), losses.rounds(), seed);
  SeedRun run;
  run.seed = seed;
  if (keep_records) run.records.reserve(losses.rounds());
  for (std::size_t t = 0; t < losses.rounds(); ++t) {
    const BanditRound r = policy->play(losses.row(t));
    run.incurred += r.loss;
    if (keep_records) {
      run.records.push_back(RoundRecord{r.t, r.arm, r.loss, r.gamma_prev, r.eta_prev,
                                        run.incurred - best_prefix[t]});
    }
  }
  run.regret = run.incurred - best_prefix.back();
  return run;
}

namespace detail {

inline void fill_statistics(RegretSummary& s, const LossMatrix& losses) {
  const std::size_t k = s.regrets.size();
  double mean = 0.0;
  for (double r : s.regrets) mean += r;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (double r : s.regrets) ss += (r - mean) * (r - mean);
  s.mean_regret = mean;
  s.std_error = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;

  s.arms = losses.arms();
  s.rounds = losses.rounds();
  s.norms = norms(losses);
  s.best_arm = best_arm(losses);
  s.best_loss = column_sums(losses)[s.best_arm];

  const double n = static_cast<double>(s.arms);
  const double base = std::sqrt(n * s.norms.l2);
  s.bound_horizon = base + s.norms.linf * std::sqrt(n * static_cast<double>(s.rounds));
  s.bound_data = base + s.norms.linf * std::sqrt(n * s.norms.l1);
  // Both bounds vanish only on the all-zero matrix, where regret is zero too.
  s.ratio_horizon = s.bound_horizon > 0.0 ? mean / s.bound_horizon : 0.0;
  s.ratio_data = s.bound_data > 0.0 ? mean / s.bound_data : 0.0;
}

}  // namespace detail

/// Runs one learner per seed on `losses`, in parallel across seeds. Results
/// are ordered by the seed list regardless of scheduling. The first failing
/// seed in list order has its exception rethrown.
inline Experiment run_experiment(const PolicySpec& spec, const LossMatrix& losses,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ExperimentOptions& options = {}) {
  if (seeds.empty()) throw PreconditionError("run_experiment: seed list is empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw PreconditionError("run_experiment: seed list has duplicates");
  }
  if (losses.rounds() == 0 || losses.arms() == 0) {
    throw PreconditionError("run_experiment: empty loss matrix");
  }

  const std::vector<double> best = best_prefix_loss(losses);
  std::vector<SeedRun> runs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        runs[k] = run_seed(spec, losses, best, seeds[k], options.keep_records);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Experiment out;
  out.summary.policy = std::string(to_string(spec.kind));
  out.summary.scale = spec.kind == PolicyKind::kExp3 ? spec.scale : 0.0;
  out.summary.seeds = seeds;
  for (const SeedRun& r : runs) out.summary.regrets.push_back(r.regret);
  detail::fill_statistics(out.summary, losses);
  out.runs = std::move(runs);
  return out;
}

inline Experiment run_experiment(const PolicySpec& spec, const AdversaryConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ExperimentOptions& options = {}) {
  if (seeds.empty()) throw PreconditionError("run_experiment: seed list is empty");
  Experiment out = run_experiment(spec, generate(config), seeds, options);
  out.summary.adversary = config;
  return out;
}

/// Seeds first, first + 1, ..., first + count - 1.
inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t k = 0; k < count; ++k) seeds[k] = first + k;
  return seeds;
}

// ---------------------------------------------------------------------------
// Serialization.

using Json = nlohmann::ordered_json;

inline Json to_json(const AdversaryConfig& c) {
  Json j;
  j["kind"] = std::string(to_string(c.kind));
  j["arms"] = c.arms;
  j["rounds"] = c.rounds;
  switch (c.kind) {
    case AdversaryKind::kRescaled:
      j["factor"] = c.factor;
      j["inner"] = to_json(*c.inner);
      return j;
    case AdversaryKind::kBernoulliGap:
      j["gap"] = c.gap;
      break;
    case AdversaryKind::kDriftingBestArm:
      j["gap"] = c.gap;
      j["period"] = c.period;
      break;
    case AdversaryKind::kSparseHeavy:
      j["sparsity"] = c.sparsity;
      j["magnitude"] = c.magnitude;
      j["density"] = c.density;
      break;
    case AdversaryKind::kSignMixed:
      j["gap"] = c.gap;
      j["magnitude"] = c.magnitude;
      break;
    default:
      break;
  }
  j["seed"] = c.seed;
  return j;
}

/// Inverse of to_json; missing parameters take their defaults.
inline AdversaryConfig adversary_from_json(const Json& j) {
  try {
    AdversaryConfig c;
    c.kind = parse_adversary_kind(j.at("kind").get<std::string>());
    if (c.kind == AdversaryKind::kRescaled) {
      AdversaryConfig inner = adversary_from_json(j.at("inner"));
      return rescaled(inner, j.at("factor").get<double>());
    }
    c.arms = j.at("arms").get<std::size_t>();
    c.rounds = j.at("rounds").get<std::size_t>();
    c.seed = j.value("seed", c.seed);
    c.gap = j.value("gap", c.gap);
    c.sparsity = j.value("sparsity", c.sparsity);
    c.magnitude = j.value("magnitude", c.magnitude);
    c.density = j.value("density", c.density);
    c.period = j.value("period", c.period);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("adversary config: ") + e.what());
  }
}

inline Json to_json(const RegretSummary& s) {
  Json j;
  j["schema"] = "sfmab.summary/1";
  j["policy"] = s.policy;
  if (s.policy == "exp3") j["scale"] = s.scale;
  if (s.adversary) {
    j["adversary"] = to_json(*s.adversary);
  } else {
    j["adversary"] = Json{{"source", s.source}};
  }
  j["arms"] = s.arms;
  j["rounds"] = s.rounds;
  j["seeds"] = s.seeds;
  j["regret"] = {{"mean", s.mean_regret}, {"std_error", s.std_error}, {"per_seed", s.regrets}};
  j["norms"] = {{"linf", s.norms.linf}, {"l1", s.norms.l1}, {"l2", s.norms.l2},
                {"sinf", s.norms.sinf}};
  j["best_arm"] = {{"index", s.best_arm}, {"loss", s.best_loss}};
  j["bounds"] = {{"horizon", s.bound_horizon}, {"data", s.bound_data}};
  j["ratios"] = {{"horizon", s.ratio_horizon}, {"data", s.ratio_data}};
  return j;
}

inline constexpr std::string_view kTraceHeader = "t,arm,loss,gamma,eta,cum_regret";

inline std::string trace_csv(const std::vector<RoundRecord>& records) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const RoundRecord& r : records) {
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.arm);
    out += ',';
    append_double(out, r.loss);
    out += ',';
    append_double(out, r.gamma);
    out += ',';
    append_double(out, r.eta);
    out += ',';
    append_double(out, r.cum_regret);
    out += '\n';
  }
  return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Writes summary.json and one trace_seed_<seed>.csv per run that kept its
/// records. Returns the paths written.
inline std::vector<std::filesystem::path> emit(const Experiment& exp,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  const std::filesystem::path summary = out_dir / "summary.json";
  detail::write_file(summary, to_json(exp.summary).dump(2) + "\n");
  written.push_back(summary);
  for (const SeedRun& run : exp.runs) {
    if (run.records.empty()) continue;
    const std::filesystem::path trace = out_dir / ("trace_seed_" + std::to_string(run.seed) + ".csv");
    detail::write_file(trace, trace_csv(run.records));
    written.push_back(trace);
  }
  return written;
}

}  // namespace sfmab

#endif  // SFMAB_HARNESS_HPP
