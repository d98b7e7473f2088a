#pragma once

// Brute-force reference implementations, kept independent of the library
// code paths they check. Candidate sets and tie-breaking rules mirror the
// documented contracts: ties within 1e-12 resolve lexicographically.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "wardboost/ada.hpp"
#include "wardboost/gbt.hpp"

namespace wardboost::testing {

// ---------------------------------------------------------------------------
// Stump search
// ---------------------------------------------------------------------------

inline int oracle_stump_vote(const ada::Stump& stump, const FeatureSnapshot& x,
                             const AgeBins& bins) {
  const auto& value = x.values[stump.feature];
  if (!value.has_value()) return 0;
  if (stump.age_bin != ada::kAllAges) {
    if (!x.values[kFeatAge].has_value()) return 0;
    const auto bin = bins.try_index(x.age());
    if (!bin.has_value() || *bin != stump.age_bin) return 0;
  }
  if (*value >= stump.threshold) return stump.polarity;
  return -stump.polarity;
}

inline std::optional<ada::StumpFit> oracle_best_stump(std::span<const FeatureSnapshot> data,
                                                      std::span<const double> weights,
                                                      const AgeBins& bins) {
  const double eps = 1.0 / (2.0 * static_cast<double>(data.size()));
  std::optional<ada::StumpFit> best;

  const auto consider = [&](const ada::Stump& stump) {
    double w_plus = 0.0, w_minus = 0.0, w_zero = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int vote = oracle_stump_vote(stump, data[i], bins);
      if (vote == 0) {
        w_zero += weights[i];
      } else if (vote == data[i].label) {
        w_plus += weights[i];
      } else {
        w_minus += weights[i];
      }
    }
    if (!(w_plus > w_minus)) return;
    ada::StumpFit cand;
    cand.stump = stump;
    cand.z = w_zero + 2.0 * std::sqrt(w_plus * w_minus);
    cand.alpha = 0.5 * std::log((w_plus + eps) / (w_minus + eps));
    if (!best) {
      best = cand;
      return;
    }
    if (cand.z < best->z - 1e-12) {
      best = cand;
    } else if (cand.z <= best->z + 1e-12) {
      const auto key = [](const ada::Stump& s) {
        return std::make_tuple(s.feature, s.age_bin, s.threshold, s.polarity == +1 ? 0 : 1);
      };
      if (key(stump) < key(best->stump)) best = cand;
    }
  };

  for (int feature = 0; feature < kFeatureCount; ++feature) {
    std::vector<int> scopes;
    if (feature == kFeatAge) {
      scopes.push_back(ada::kAllAges);
    } else {
      for (int b = 0; b < bins.count(); ++b) scopes.push_back(b);
    }
    for (const int scope : scopes) {
      std::set<double> values;
      for (const auto& x : data) {
        if (!x.values[feature].has_value()) continue;
        if (scope != ada::kAllAges) {
          if (!x.values[kFeatAge].has_value()) continue;
          const auto bin = bins.try_index(x.age());
          if (!bin.has_value() || *bin != scope) continue;
        }
        values.insert(*x.values[feature]);
      }
      if (values.empty()) continue;
      std::vector<double> sorted(values.begin(), values.end());
      std::vector<double> thresholds{sorted.front()};
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        thresholds.push_back(0.5 * (sorted[i] + sorted[i + 1]));
      }
      for (const double tau : thresholds) {
        for (const int polarity : {+1, -1}) {
          consider(ada::Stump{feature, scope, tau, polarity});
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

inline std::optional<gbt::SplitCandidate> oracle_find_best_split(
    std::span<const FeatureSnapshot> data, std::span<const int> rows,
    std::span<const double> grad, std::span<const double> hess, const gbt::GbtParams& params,
    std::span<const int> allowed_features) {
  const auto score = [&](double g, double h) {
    const double den = h + params.lambda;
    return den > 0.0 ? g * g / den : 0.0;
  };
  double g_total = 0.0, h_total = 0.0;
  for (const int r : rows) {
    g_total += grad[r];
    h_total += hess[r];
  }

  std::optional<gbt::SplitCandidate> best;
  for (const int feature : allowed_features) {
    std::set<double> values;
    for (const int r : rows) {
      if (data[r].values[feature].has_value()) values.insert(*data[r].values[feature]);
    }
    if (values.size() < 2) continue;
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double tau = 0.5 * (sorted[i] + sorted[i + 1]);
      for (const bool missing_left : {true, false}) {
        double gl = 0.0, hl = 0.0;
        for (const int r : rows) {
          const auto& v = data[r].values[feature];
          const bool left = v.has_value() ? (*v < tau) : missing_left;
          if (left) {
            gl += grad[r];
            hl += hess[r];
          }
        }
        const double gr = g_total - gl;
        const double hr = h_total - hl;
        if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
        gbt::SplitCandidate cand;
        cand.feature = feature;
        cand.threshold = tau;
        cand.default_left = missing_left;
        cand.gain =
            0.5 * (score(gl, hl) + score(gr, hr) - score(g_total, h_total)) - params.gamma;
        if (!(cand.gain > 0.0)) continue;
        if (!best) {
          best = cand;
          continue;
        }
        if (cand.gain > best->gain + 1e-12) {
          best = cand;
        } else if (cand.gain >= best->gain - 1e-12) {
          const auto key = [](const gbt::SplitCandidate& c) {
            return std::make_tuple(c.feature, c.threshold, c.default_left ? 0 : 1);
          };
          if (key(cand) < key(*best)) best = cand;
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Pairwise concordance with ties counted one half (accumulated doubled so
// the sum stays integral).
inline double oracle_auroc_pairwise(std::span<const double> scores, std::span<const int> labels) {
  long long twice = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] <= 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] > 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        twice += 2;
      } else if (scores[i] == scores[j]) {
        twice += 1;
      }
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pairs));
}

// Exhaustive cutoff sweep for "positive iff score >= c".
inline int oracle_select_cutoff(std::span<const int> scores, std::span<const int> labels) {
  long long pos = 0, neg = 0;
  int max_score = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] > 0 ? pos : neg)++;
    max_score = std::max(max_score, scores[i]);
  }
  int best_c = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_sens = -1.0;
  for (int c = 0; c <= max_score + 1; ++c) {
    long long tp = 0, tn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool predicted_pos = scores[i] >= c;
      if (predicted_pos && labels[i] > 0) ++tp;
      if (!predicted_pos && labels[i] < 0) ++tn;
    }
    const double sens = static_cast<double>(tp) / static_cast<double>(pos);
    const double spec = static_cast<double>(tn) / static_cast<double>(neg);
    const double gap = std::abs(sens - spec);
    if (gap < best_gap || (gap == best_gap && sens > best_sens)) {
      best_gap = gap;
      best_sens = sens;
      best_c = c;
    }
  }
  return best_c;
}

// ---------------------------------------------------------------------------
// Numeric derivatives of the binary logistic loss
// ---------------------------------------------------------------------------

inline long double logistic_loss_ld(int y01, long double f) {
  const long double p = 1.0L / (1.0L + std::exp(-f));
  return -(static_cast<long double>(y01) * std::log(p) +
           (1.0L - static_cast<long double>(y01)) * std::log(1.0L - p));
}

inline double numeric_logistic_grad(int y01, double f, double step = 1e-5) {
  const long double d = step;
  return static_cast<double>((logistic_loss_ld(y01, f + d) - logistic_loss_ld(y01, f - d)) /
                             (2.0L * d));
}

inline double numeric_logistic_hess(int y01, double f, double step = 1e-5) {
  const long double d = step;
  return static_cast<double>((logistic_loss_ld(y01, f + d) - 2.0L * logistic_loss_ld(y01, f) +
                              logistic_loss_ld(y01, f - d)) /
                             (d * d));
}

// Golden-section minimizer of the per-leaf objective g*w + (h + lambda)*w^2/2.
inline double numeric_leaf_argmin(double g, double h, double lambda) {
  const auto objective = [&](double w) { return g * w + 0.5 * (h + lambda) * w * w; };
  double lo = -1e3, hi = 1e3;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (objective(a) < objective(b)) {
      hi = b;
    } else {
      lo = a;
    }
    a = hi - phi * (hi - lo);
    b = lo + phi * (hi - lo);
  }
  return 0.5 * (lo + hi);
}

}  // namespace wardboost::testing
