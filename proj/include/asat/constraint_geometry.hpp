/*
 * Copyright 2026 The ASAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Rescaled perturbation geometry: timestamp decay functions, per-dimension
// scale vectors, and the closed-form steepest-ascent step and Euclidean
// projection for the region {delta : ||delta / alpha||_p <= epsilon} with
// p in {2, inf}.

#ifndef ASAT_CONSTRAINT_GEOMETRY_HPP_
#define ASAT_CONSTRAINT_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asat/errors.hpp"

namespace asat {

using Vector = std::vector<double>;
using Perturbation = Vector;

// Absolute slack on the norm inequality of a membership test.
inline constexpr double kMembershipSlack = 1e-9;

enum class Norm { L2, Linf };
enum class DecayKind { Const, Exp, Linear };

inline std::string_view to_string(Norm norm) {
  return norm == Norm::L2 ? "l2" : "linf";
}

inline Norm parse_norm(std::string_view text) {
  if (text == "l2" || text == "L2") return Norm::L2;
  if (text == "linf" || text == "Linf" || text == "inf") return Norm::Linf;
  throw ConfigError("unknown norm '" + std::string(text) + "'");
}

inline std::string_view to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::Const:
      return "const";
    case DecayKind::Exp:
      return "exp";
    case DecayKind::Linear:
      return "linear";
  }
  return "?";
}

inline DecayKind parse_decay_kind(std::string_view text) {
  if (text == "const") return DecayKind::Const;
  if (text == "exp") return DecayKind::Exp;
  if (text == "linear") return DecayKind::Linear;
  throw ConfigError("unknown decay kind '" + std::string(text) + "'");
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Maps a timestamp rank t (1 = most recent) to a scale in (0, 1].
struct DecaySpec {
  DecayKind kind = DecayKind::Const;
  double gamma = 1.0;
  int horizon = 1;  // number of distinct timestamp ranks

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
      throw ConfigError("decay gamma must lie in (0, 1]");
    }
    if (horizon < 1) throw ConfigError("decay horizon must be >= 1");
  }
};

inline double decay_value(const DecaySpec& spec, int t) {
  spec.validate();
  if (t < 1 || t > spec.horizon) {
    throw RangeError("timestamp rank " + std::to_string(t) +
                     " outside [1, " + std::to_string(spec.horizon) + "]");
  }
  switch (spec.kind) {
    case DecayKind::Const:
      return 1.0;
    case DecayKind::Exp:
      return std::pow(spec.gamma, t - 1);
    case DecayKind::Linear:
      if (spec.horizon == 1) return 1.0;
      return 1.0 - (1.0 - spec.gamma) * static_cast<double>(t - 1) /
                       static_cast<double>(spec.horizon - 1);
  }
  return 1.0;
}

// Per-dimension radius multipliers alpha_i in (0, 1].
class ScaleVector {
 public:
  ScaleVector() = default;
  explicit ScaleVector(Vector alpha) : alpha_(std::move(alpha)) {
    for (double a : alpha_) {
      if (!(a > 0.0 && a <= 1.0)) {
        throw ConfigError("scale entries must lie in (0, 1]");
      }
    }
  }

  static ScaleVector ones(std::size_t k) { return ScaleVector(Vector(k, 1.0)); }

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t i) const { return alpha_[i]; }
  std::span<const double> values() const { return alpha_; }

  friend bool operator==(const ScaleVector&, const ScaleVector&) = default;

 private:
  Vector alpha_;
};

inline ScaleVector build_scales(const DecaySpec& spec,
                                std::span<const int> ranks) {
  Vector alpha;
  alpha.reserve(ranks.size());
  for (int t : ranks) alpha.push_back(decay_value(spec, t));
  return ScaleVector(std::move(alpha));
}

inline double lp_norm(std::span<const double> v, Norm norm) {
  if (norm == Norm::Linf) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// The rescaled ball {delta : ||delta / alpha||_p <= epsilon}.
struct ConstraintSet {
  Norm norm = Norm::L2;
  double epsilon = 0.0;
  ScaleVector scales;

  void validate() const {
    // epsilon == 0 is admitted as the degenerate single-point set.
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw ConfigError("constraint radius must be finite and >= 0");
    }
  }

  // ||delta / alpha||_p
  double scaled_norm(std::span<const double> delta) const {
    check_dim(delta.size());
    Vector u(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) u[i] = delta[i] / scales[i];
    return lp_norm(u, norm);
  }

  bool contains(std::span<const double> delta,
                double slack = kMembershipSlack) const {
    return scaled_norm(delta) <= epsilon + slack;
  }

  // Same scales and norm, different radius (PGD step sets).
  ConstraintSet with_radius(double radius) const {
    return ConstraintSet{norm, radius, scales};
  }

  void check_dim(std::size_t k) const {
    if (k != scales.size()) {
      throw ShapeError("vector length " + std::to_string(k) +
                       " does not match constraint dimension " +
                       std::to_string(scales.size()));
    }
  }
};

struct FgsmStep {
  Perturbation delta;
  bool zero_gradient = false;  // maximizer non-unique; delta is zero
};

// argmax over delta in S of delta^T g.
//   L2:   delta = eps * alpha (.) (alpha (.) g) / ||alpha (.) g||_2
//   Linf: delta = eps * alpha (.) sgn(g)
inline FgsmStep fgsm_direction(std::span<const double> g,
                               const ConstraintSet& set) {
  set.check_dim(g.size());
  const std::size_t k = g.size();
  FgsmStep step{Perturbation(k, 0.0), false};
  if (set.norm == Norm::Linf) {
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) {
      const double s = sign(g[i]);
      any = any || s != 0.0;
      step.delta[i] = set.epsilon * set.scales[i] * s;
    }
    step.zero_gradient = !any;
    return step;
  }
  Vector w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = set.scales[i] * g[i];
  const double n = lp_norm(w, Norm::L2);
  if (n == 0.0) {
    step.zero_gradient = true;
    return step;
  }
  for (std::size_t i = 0; i < k; ++i) {
    step.delta[i] = set.epsilon * set.scales[i] * w[i] / n;
  }
  return step;
}

// Euclidean-style projection onto S through the map u = v / alpha.
inline Perturbation project(std::span<const double> v,
                            const ConstraintSet& set) {
  set.check_dim(v.size());
  const std::size_t k = v.size();
  Perturbation out(v.begin(), v.end());
  if (set.norm == Norm::Linf) {
    for (std::size_t i = 0; i < k; ++i) {
      const double a = set.scales[i];
      out[i] = a * std::clamp(v[i] / a, -set.epsilon, set.epsilon);
    }
    return out;
  }
  const double n = set.scaled_norm(v);
  if (n <= set.epsilon) return out;  // covers v == 0
  const double shrink = set.epsilon / n;
  for (std::size_t i = 0; i < k; ++i) out[i] = v[i] * shrink;
  return out;
}

}  // namespace asat

#endif  // ASAT_CONSTRAINT_GEOMETRY_HPP_
