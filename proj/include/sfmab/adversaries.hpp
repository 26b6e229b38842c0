#ifndef SFMAB_ADVERSARIES_HPP
#define SFMAB_ADVERSARIES_HPP

// Oblivious loss sequences. Every generator materializes the full T x n
// matrix from (config, seed) before any play happens, so the sequence cannot
// depend on the learner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfmab/errors.hpp"
#include "sfmab/format.hpp"
#include "sfmab/random.hpp"

namespace sfmab {

enum class AdversaryKind {
  kZero,
  kBoundedUniform,   // iid U[0, 1)
  kBernoulliGap,     // Bernoulli(1/2 - gap) on arm 0, Bernoulli(1/2) elsewhere
  kSparseHeavy,      // k random arms at +-magnitude on a `density` fraction of rounds
  kSignMixed,        // U[-magnitude, magnitude), arm 0 shifted down by gap * magnitude
  kDriftingBestArm,  // Bernoulli gap whose good arm moves every `period` rounds
  kRescaled,         // factor * inner
};

inline std::string_view to_string(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::kZero: return "zero";
    case AdversaryKind::kBoundedUniform: return "bounded-uniform";
    case AdversaryKind::kBernoulliGap: return "bernoulli-gap";
    case AdversaryKind::kSparseHeavy: return "sparse-heavy";
    case AdversaryKind::kSignMixed: return "sign-mixed";
    case AdversaryKind::kDriftingBestArm: return "drifting-best-arm";
    case AdversaryKind::kRescaled: return "rescaled";
  }
  return "unknown";
}

inline AdversaryKind parse_adversary_kind(std::string_view name) {
  for (AdversaryKind k :
       {AdversaryKind::kZero, AdversaryKind::kBoundedUniform, AdversaryKind::kBernoulliGap,
        AdversaryKind::kSparseHeavy, AdversaryKind::kSignMixed, AdversaryKind::kDriftingBestArm,
        AdversaryKind::kRescaled}) {
    if (to_string(k) == name) return k;
  }
  throw PreconditionError("unknown adversary kind '" + std::string(name) + "'");
}

struct AdversaryConfig {
  AdversaryKind kind = AdversaryKind::kBoundedUniform;
  std::size_t arms = 2;
  std::size_t rounds = 1;
  std::uint64_t seed = 0;

  double gap = 0.3;
  std::size_t sparsity = 1;
  double magnitude = 1.0;
  double density = 1.0;
  std::size_t period = 100;

  double factor = 1.0;
  std::shared_ptr<const AdversaryConfig> inner;

  void validate() const {
    if (arms == 0) throw PreconditionError("adversary: need at least one arm");
    if (rounds == 0) throw PreconditionError("adversary: horizon must be positive");
    switch (kind) {
      case AdversaryKind::kBernoulliGap:
      case AdversaryKind::kDriftingBestArm:
        if (!(gap >= 0.0 && gap <= 0.5)) {
          throw PreconditionError("adversary: gap must lie in [0, 1/2]");
        }
        if (kind == AdversaryKind::kDriftingBestArm && period == 0) {
          throw PreconditionError("adversary: drift period must be positive");
        }
        break;
      case AdversaryKind::kSparseHeavy:
        if (sparsity == 0 || sparsity > arms) {
          throw PreconditionError("adversary: sparsity must lie in [1, n]");
        }
        if (!(magnitude > 0.0 && std::isfinite(magnitude))) {
          throw PreconditionError("adversary: magnitude must be positive and finite");
        }
        if (!(density >= 0.0 && density <= 1.0)) {
          throw PreconditionError("adversary: density must lie in [0, 1]");
        }
        break;
      case AdversaryKind::kSignMixed:
        if (!(magnitude > 0.0 && std::isfinite(magnitude))) {
          throw PreconditionError("adversary: magnitude must be positive and finite");
        }
        if (!(gap >= 0.0 && gap <= 1.0)) throw PreconditionError("adversary: gap must lie in [0, 1]");
        break;
      case AdversaryKind::kRescaled:
        if (!inner) throw PreconditionError("adversary: rescaled needs an inner config");
        if (!std::isfinite(factor)) throw PreconditionError("adversary: factor must be finite");
        if (inner->arms != arms || inner->rounds != rounds) {
          throw PreconditionError("adversary: rescaled shape differs from its inner config");
        }
        inner->validate();
        break;
      default:
        break;
    }
  }
};

/// factor * inner, with the shape copied from inner.
inline AdversaryConfig rescaled(const AdversaryConfig& inner, double factor) {
  AdversaryConfig out;
  out.kind = AdversaryKind::kRescaled;
  out.arms = inner.arms;
  out.rounds = inner.rounds;
  out.seed = inner.seed;
  out.factor = factor;
  out.inner = std::make_shared<const AdversaryConfig>(inner);
  return out;
}

/// Row-major T x n matrix; row t - 1 is l_t.
class LossMatrix {
 public:
  LossMatrix() = default;
  LossMatrix(std::size_t rounds, std::size_t arms)
      : rounds_(rounds), arms_(arms), values_(rounds * arms, 0.0) {}

  std::size_t rounds() const { return rounds_; }
  std::size_t arms() const { return arms_; }

  std::span<const double> row(std::size_t t) const {
    return {values_.data() + t * arms_, arms_};
  }
  std::span<double> row(std::size_t t) { return {values_.data() + t * arms_, arms_}; }
  double at(std::size_t t, std::size_t i) const { return values_[t * arms_ + i]; }
  double& at(std::size_t t, std::size_t i) { return values_[t * arms_ + i]; }

  std::span<const double> values() const { return values_; }

  bool operator==(const LossMatrix&) const = default;

 private:
  std::size_t rounds_ = 0;
  std::size_t arms_ = 0;
  std::vector<double> values_;
};

namespace detail {

// Keeps adversary draws unrelated to learner draws made from the same seed.
inline constexpr std::uint64_t kAdversaryStream = 0x6164766572736172ULL;

inline double bernoulli(Rng& rng, double mean) { return uniform01(rng) < mean ? 1.0 : 0.0; }

}  // namespace detail

inline LossMatrix generate(const AdversaryConfig& config) {
  config.validate();
  const std::size_t T = config.rounds;
  const std::size_t n = config.arms;

  if (config.kind == AdversaryKind::kRescaled) {
    LossMatrix m = generate(*config.inner);
    for (std::size_t t = 0; t < T; ++t) {
      for (double& x : m.row(t)) x *= config.factor;
    }
    return m;
  }

  LossMatrix m(T, n);
  Rng rng = make_rng(config.seed, detail::kAdversaryStream);
  switch (config.kind) {
    case AdversaryKind::kZero:
      break;
    case AdversaryKind::kBoundedUniform:
      for (std::size_t t = 0; t < T; ++t) {
        for (double& x : m.row(t)) x = uniform01(rng);
      }
      break;
    case AdversaryKind::kBernoulliGap:
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
          m.at(t, i) = detail::bernoulli(rng, i == 0 ? 0.5 - config.gap : 0.5);
        }
      }
      break;
    case AdversaryKind::kDriftingBestArm:
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t good = (t / config.period) % n;
        for (std::size_t i = 0; i < n; ++i) {
          m.at(t, i) = detail::bernoulli(rng, i == good ? 0.5 - config.gap : 0.5);
        }
      }
      break;
    case AdversaryKind::kSparseHeavy: {
      std::vector<std::size_t> order(n);
      for (std::size_t t = 0; t < T; ++t) {
        // Draw both numbers every round so density does not shift later rows.
        const double u = uniform01(rng);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t j = 0; j < config.sparsity; ++j) {
          const std::size_t pick = j + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - j));
          std::swap(order[j], order[std::min(pick, n - 1)]);
          const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
          if (u < config.density) m.at(t, order[j]) = sign * config.magnitude;
        }
      }
      break;
    }
    case AdversaryKind::kSignMixed:
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
          double x = config.magnitude * (2.0 * uniform01(rng) - 1.0);
          if (i == 0) x -= config.gap * config.magnitude;
          m.at(t, i) = x;
        }
      }
      break;
    case AdversaryKind::kRescaled:
      break;
  }
  return m;
}

struct LossNorms {
  double linf = 0.0;  // max_t ||l_t||_inf
  double l1 = 0.0;    // sum_t ||l_t||_1
  double l2 = 0.0;    // sum_t ||l_t||_2^2
  double sinf = 0.0;  // ||sum_t l_t||_inf
};

inline std::vector<double> column_sums(const LossMatrix& m) {
  std::vector<double> sums(m.arms(), 0.0);
  for (std::size_t t = 0; t < m.rounds(); ++t) {
    for (std::size_t i = 0; i < m.arms(); ++i) sums[i] += m.at(t, i);
  }
  return sums;
}

inline LossNorms norms(const LossMatrix& m) {
  LossNorms out;
  for (double x : m.values()) {
    out.linf = std::max(out.linf, std::abs(x));
    out.l1 += std::abs(x);
    out.l2 += x * x;
  }
  for (double s : column_sums(m)) out.sinf = std::max(out.sinf, std::abs(s));
  return out;
}

/// Arm with the smallest total loss; ties go to the lowest index.
inline std::size_t best_arm(const LossMatrix& m) {
  if (m.arms() == 0) throw PreconditionError("best_arm: empty matrix");
  const std::vector<double> sums = column_sums(m);
  return static_cast<std::size_t>(std::min_element(sums.begin(), sums.end()) - sums.begin());
}

// ---------------------------------------------------------------------------
// CSV: a header row of arm indices, then one row per round.

inline void write_csv(std::ostream& out, const LossMatrix& m) {
  std::string line;
  for (std::size_t i = 0; i < m.arms(); ++i) {
    if (i) line += ',';
    line += std::to_string(i);
  }
  line += '\n';
  out << line;
  for (std::size_t t = 0; t < m.rounds(); ++t) {
    line.clear();
    for (std::size_t i = 0; i < m.arms(); ++i) {
      if (i) line += ',';
      append_double(line, m.at(t, i));
    }
    line += '\n';
    out << line;
  }
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace detail

inline LossMatrix read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw PreconditionError("loss csv: missing header row");
  const auto header = detail::split_commas(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (parse_double(header[i]) != static_cast<double>(i)) {
      throw PreconditionError("loss csv: header must list arm indices 0..n-1");
    }
  }
  const std::size_t n = header.size();
  std::vector<double> values;
  std::size_t rounds = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != n) {
      throw PreconditionError("loss csv: row " + std::to_string(rounds + 1) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(n));
    }
    for (std::string_view c : cells) {
      const double x = parse_double(c);
      if (!std::isfinite(x)) throw PreconditionError("loss csv: non-finite entry");
      values.push_back(x);
    }
    ++rounds;
  }
  if (rounds == 0) throw PreconditionError("loss csv: no rounds");
  LossMatrix m(rounds, n);
  std::copy(values.begin(), values.end(), m.row(0).data());
  return m;
}

inline void save_csv(const std::string& path, const LossMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, m);
  if (!out.flush()) throw IoError("write failed for '" + path + "'");
}

inline LossMatrix load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return read_csv(in);
  } catch (const PreconditionError& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

}  // namespace sfmab

#endif  // SFMAB_ADVERSARIES_HPP
