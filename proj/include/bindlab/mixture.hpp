#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bindlab/counterfactual.hpp"
#include "bindlab/errors.hpp"

namespace bindlab {

inline constexpr double kSigmaFloor = 1e-3;
inline constexpr double kOracleProbFloor = 1e-12;

// Learnable parameters of the combined retrieval model over n candidate groups.
struct MixtureParameters {
  int n = 0;
  double w_pos = 1.0;
  std::vector<double> w_lex;  // indexed by i_l - 1
  std::vector<double> w_ref;  // indexed by i_r - 1
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;

  static MixtureParameters initial(int n) {
    MixtureParameters p;
    p.n = n;
    p.w_lex.assign(static_cast<std::size_t>(n), 0.0);
    p.w_ref.assign(static_cast<std::size_t>(n), 0.0);
    return p;
  }

  // Flat layout: w_pos, alpha, beta, gamma, w_lex[0..n), w_ref[0..n).
  std::size_t size() const { return 4 + 2 * static_cast<std::size_t>(n); }
  static constexpr std::size_t kWPos = 0, kAlpha = 1, kBeta = 2, kGamma = 3, kLex = 4;
  std::size_t ref_offset() const { return kLex + static_cast<std::size_t>(n); }

  std::vector<double> flatten() const {
    std::vector<double> v{w_pos, alpha, beta, gamma};
    v.insert(v.end(), w_lex.begin(), w_lex.end());
    v.insert(v.end(), w_ref.begin(), w_ref.end());
    return v;
  }

  static MixtureParameters unflatten(int n, std::span<const double> v) {
    MixtureParameters p = initial(n);
    if (v.size() != p.size()) throw ContractError("flat parameter vector has the wrong length");
    p.w_pos = v[kWPos];
    p.alpha = v[kAlpha];
    p.beta = v[kBeta];
    p.gamma = v[kGamma];
    std::copy_n(v.begin() + kLex, n, p.w_lex.begin());
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(p.ref_offset()), n, p.w_ref.begin());
    return p;
  }

  void validate() const {
    if (n < 1) throw ConfigurationError("mixture parameters need n >= 1");
    if (static_cast<int>(w_lex.size()) != n || static_cast<int>(w_ref.size()) != n) {
      throw ConfigurationError("w_lex and w_ref must have length n");
    }
    for (double v : flatten()) {
      if (!std::isfinite(v)) throw ConfigurationError("mixture parameters must be finite");
    }
  }
};

enum class PositionalForm { Gaussian, OneHot, Oracle, Absent };
enum class OracleSpace { Log, Probability };

using DistributionTable = std::vector<std::vector<double>>;

struct VariantSpec {
  std::string name;
  PositionalForm positional = PositionalForm::Gaussian;
  bool lexical_on = true;
  bool reflexive_on = true;
  // Row i_p - 1 holds the empirical mean distribution for that positional index.
  std::optional<DistributionTable> oracle_table;
  OracleSpace oracle_space = OracleSpace::Log;

  bool trains_anything() const {
    return positional == PositionalForm::Gaussian || positional == PositionalForm::OneHot ||
           (positional == PositionalForm::Oracle && oracle_space == OracleSpace::Probability) ||
           lexical_on || reflexive_on;
  }

  void validate(int n) const {
    if (positional != PositionalForm::Oracle) return;
    if (!oracle_table) {
      throw ConfigurationError("variant '" + name + "' needs an oracle positional table");
    }
    if (static_cast<int>(oracle_table->size()) != n) {
      throw ConfigurationError("oracle table must have n rows");
    }
    for (const auto& row : *oracle_table) {
      if (static_cast<int>(row.size()) != n) {
        throw ConfigurationError("oracle table rows must have length n");
      }
    }
  }

  // Which flat parameters this variant can move.
  std::vector<bool> trainable_mask(const MixtureParameters& p) const {
    std::vector<bool> mask(p.size(), false);
    if (positional == PositionalForm::Gaussian) {
      mask[MixtureParameters::kWPos] = mask[MixtureParameters::kAlpha] =
          mask[MixtureParameters::kBeta] = mask[MixtureParameters::kGamma] = true;
    } else if (positional == PositionalForm::OneHot ||
               (positional == PositionalForm::Oracle && oracle_space == OracleSpace::Probability)) {
      mask[MixtureParameters::kWPos] = true;
    }
    for (int k = 0; k < p.n; ++k) {
      if (lexical_on) mask[MixtureParameters::kLex + k] = true;
      if (reflexive_on) mask[p.ref_offset() + k] = true;
    }
    return mask;
  }
};

inline const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names{"M",      "M-onehotP", "M-oracleP", "prevailing",
                                              "M\\P",   "M\\L",      "M\\R",      "M\\LR",
                                              "M\\PR",  "M\\PL",     "uniform"};
  return names;
}

inline VariantSpec build_variant(std::string_view name) {
  using PF = PositionalForm;
  struct Row {
    const char* name;
    PF pos;
    bool lex;
    bool ref;
  };
  static constexpr Row kRows[] = {
      {"M", PF::Gaussian, true, true},        {"M-onehotP", PF::OneHot, true, true},
      {"M-oracleP", PF::Oracle, true, true},  {"prevailing", PF::OneHot, false, false},
      {"M\\P", PF::Absent, true, true},       {"M\\L", PF::Gaussian, false, true},
      {"M\\R", PF::Gaussian, true, false},    {"M\\LR", PF::Gaussian, false, false},
      {"M\\PR", PF::Absent, true, false},     {"M\\PL", PF::Absent, false, true},
      {"uniform", PF::Absent, false, false},
  };
  for (const auto& r : kRows) {
    if (name == r.name) return VariantSpec{r.name, r.pos, r.lex, r.ref, std::nullopt};
  }
  throw ConfigurationError("unknown mixture variant '" + std::string(name) + "'");
}

inline double sigma(const MixtureParameters& p, int i_p) {
  const double x = static_cast<double>(i_p) / p.n;
  return std::max(p.alpha * x * x + p.beta * x + p.gamma, kSigmaFloor);
}

inline bool sigma_clamped(const MixtureParameters& p, int i_p) {
  const double x = static_cast<double>(i_p) / p.n;
  return p.alpha * x * x + p.beta * x + p.gamma < kSigmaFloor;
}

inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

using LogitVector = std::vector<double>;

namespace detail {

inline void check_indices(int n, const MechanismIndices& ix) {
  for (int v : {ix.i_p, ix.i_l, ix.i_r}) {
    if (v < 1 || v > n) {
      throw IndexError("mechanism index " + std::to_string(v) + " outside [1, " +
                       std::to_string(n) + "]");
    }
  }
}

}  // namespace detail

inline LogitVector positional_logits(const MixtureParameters& p, const VariantSpec& v, int i_p) {
  LogitVector y(static_cast<std::size_t>(p.n), 0.0);
  switch (v.positional) {
    case PositionalForm::Gaussian: {
      const double s = sigma(p, i_p);
      for (int i = 1; i <= p.n; ++i) y[i - 1] = p.w_pos * normal_pdf(i, i_p, s);
      break;
    }
    case PositionalForm::OneHot:
      y[i_p - 1] = p.w_pos;
      break;
    case PositionalForm::Oracle: {
      v.validate(p.n);
      const auto& row = (*v.oracle_table)[i_p - 1];
      for (int i = 0; i < p.n; ++i) {
        y[i] = v.oracle_space == OracleSpace::Log ? std::log(std::max(row[i], kOracleProbFloor))
                                                  : p.w_pos * row[i];
      }
      break;
    }
    case PositionalForm::Absent:
      break;
  }
  return y;
}

inline LogitVector mixture_logits(const MixtureParameters& p, const VariantSpec& v,
                                  const MechanismIndices& ix) {
  detail::check_indices(p.n, ix);
  LogitVector y = positional_logits(p, v, ix.i_p);
  if (v.lexical_on) y[ix.i_l - 1] += p.w_lex[ix.i_l - 1];
  if (v.reflexive_on) y[ix.i_r - 1] += p.w_ref[ix.i_r - 1];
  return y;
}

inline std::vector<double> softmax(std::span<const double> y) {
  std::vector<double> out(y.size());
  if (y.empty()) return out;
  const double peak = *std::max_element(y.begin(), y.end());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = std::exp(y[i] - peak);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

inline std::vector<double> predict_distribution(const MixtureParameters& p, const VariantSpec& v,
                                                const MechanismIndices& ix) {
  const auto y = mixture_logits(p, v, ix);
  return softmax(y);
}

// Accumulates dLoss/dParams into `grad` (flat layout) given dLoss/dY.
inline void logits_backward(const MixtureParameters& p, const VariantSpec& v,
                            const MechanismIndices& ix, std::span<const double> dy,
                            std::span<double> grad) {
  switch (v.positional) {
    case PositionalForm::Gaussian: {
      const double s = sigma(p, ix.i_p);
      double d_wpos = 0.0;
      double d_sigma = 0.0;
      for (int i = 1; i <= p.n; ++i) {
        const double pdf = normal_pdf(i, ix.i_p, s);
        const double d = i - ix.i_p;
        d_wpos += dy[i - 1] * pdf;
        d_sigma += dy[i - 1] * p.w_pos * pdf * (d * d / (s * s * s) - 1.0 / s);
      }
      grad[MixtureParameters::kWPos] += d_wpos;
      if (!sigma_clamped(p, ix.i_p)) {
        const double x = static_cast<double>(ix.i_p) / p.n;
        grad[MixtureParameters::kAlpha] += d_sigma * x * x;
        grad[MixtureParameters::kBeta] += d_sigma * x;
        grad[MixtureParameters::kGamma] += d_sigma;
      }
      break;
    }
    case PositionalForm::OneHot:
      grad[MixtureParameters::kWPos] += dy[ix.i_p - 1];
      break;
    case PositionalForm::Oracle:
      if (v.oracle_space == OracleSpace::Probability) {
        const auto& row = (*v.oracle_table)[ix.i_p - 1];
        for (int i = 0; i < p.n; ++i) grad[MixtureParameters::kWPos] += dy[i] * row[i];
      }
      break;
    case PositionalForm::Absent:
      break;
  }
  if (v.lexical_on) grad[MixtureParameters::kLex + ix.i_l - 1] += dy[ix.i_l - 1];
  if (v.reflexive_on) grad[p.ref_offset() + ix.i_r - 1] += dy[ix.i_r - 1];
}

}  // namespace bindlab
