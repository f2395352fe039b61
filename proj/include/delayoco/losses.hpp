#pragma once

#include <optional>
#include <string>

#include "delayoco/geometry.hpp"

namespace delayoco {

enum class LossKind { Logistic, Squared, RegularizedSquared };

/// One round's convex loss.
///
///   Logistic:            log(1 + exp(-y <x, b>)),         y in {-1, +1}
///   Squared:             1/2 (y - <b, x>)^2
///   RegularizedSquared:  1/2 (y - <b, x>)^2 + gamma psi(x)
///
/// The regularized family is gamma-strongly convex relative to psi by
/// construction: its Bregman remainder is 1/2 <b, x - y>^2 + gamma B(x; y).
class LossFunction {
 public:
  static LossFunction logistic(double label, Vector feature, int origin_round = 1) {
    if (label != 1.0 && label != -1.0) throw InvalidInput("logistic label must be +1 or -1");
    vec::require_finite(feature);
    return LossFunction(LossKind::Logistic, label, std::move(feature), 0.0, std::nullopt, origin_round);
  }
  static LossFunction squared(double response, Vector feature, int origin_round = 1) {
    vec::require_finite(feature);
    return LossFunction(LossKind::Squared, response, std::move(feature), 0.0, std::nullopt, origin_round);
  }
  static LossFunction regularized_squared(double response, Vector feature, double gamma, const Geometry& geometry,
                                          int origin_round = 1) {
    if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
    vec::require_finite(feature);
    if (feature.size() != geometry.dim()) throw DimensionMismatch("feature dimension differs from geometry");
    return LossFunction(LossKind::RegularizedSquared, response, std::move(feature), gamma, geometry, origin_round);
  }

  LossKind kind() const { return kind_; }
  double target() const { return y_; }
  const Vector& feature() const { return b_; }
  double gamma() const { return gamma_; }
  int origin_round() const { return origin_; }
  std::size_t dim() const { return b_.size(); }
  const std::optional<Geometry>& anchor_geometry() const { return geometry_; }

  double value(std::span<const double> x) const {
    vec::require_same_dim(b_, x);
    const double m = vec::dot(b_, x);
    switch (kind_) {
      case LossKind::Logistic: return softplus(-y_ * m);
      case LossKind::Squared: return 0.5 * (y_ - m) * (y_ - m);
      case LossKind::RegularizedSquared: return 0.5 * (y_ - m) * (y_ - m) + gamma_ * geometry_->psi(x);
    }
    return 0.0;
  }

  Vector gradient(std::span<const double> x) const {
    vec::require_same_dim(b_, x);
    const double m = vec::dot(b_, x);
    switch (kind_) {
      case LossKind::Logistic: return vec::scaled(b_, -y_ * sigmoid(-y_ * m));
      case LossKind::Squared: return vec::scaled(b_, m - y_);
      case LossKind::RegularizedSquared: {
        Vector g = geometry_->psi_grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = gamma_ * g[i] + (m - y_) * b_[i];
        return g;
      }
    }
    return {};
  }

  static double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }
  /// log(1 + e^z) without overflow.
  static double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

 private:
  LossFunction(LossKind kind, double y, Vector b, double gamma, std::optional<Geometry> geometry, int origin)
      : kind_(kind), y_(y), b_(std::move(b)), gamma_(gamma), geometry_(std::move(geometry)), origin_(origin) {}

  LossKind kind_;
  double y_;
  Vector b_;
  double gamma_;
  std::optional<Geometry> geometry_;
  int origin_;
};

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Logistic: return "logistic";
    case LossKind::Squared: return "squared";
    case LossKind::RegularizedSquared: return "regularized_squared";
  }
  return "?";
}

struct GradientBound {
  double g_star = 0.0;
};

/// Analytic dual-norm gradient bound of one loss over the feasible set.
///   Logistic:  |b|_*
///   Squared:   (|y| + R |b|_*) |b|_*
///   RegularizedSquared: the squared bound plus gamma sup |grad psi|_*, which
///   is gamma R on the balls and gamma (1 + |ln floor|) on the floored simplex.
inline GradientBound grad_bound(const LossFunction& f, const Geometry& geometry) {
  const double bd = geometry.dual_norm(f.feature());
  const double R = geometry.radius();
  switch (f.kind()) {
    case LossKind::Logistic: return {bd};
    case LossKind::Squared: return {(std::abs(f.target()) + R * bd) * bd};
    case LossKind::RegularizedSquared: {
      const double psi_grad_sup =
          geometry.kind() == SetKind::ProbabilitySimplex ? 1.0 + std::abs(std::log(kSimplexFloor)) : R;
      return {(std::abs(f.target()) + R * bd) * bd + f.gamma() * psi_grad_sup};
    }
  }
  return {0.0};
}

/// Running sum of losses, kept in closed form where possible: squared terms
/// collapse to (A, c, const) and regularizers to a single psi weight, so an
/// evaluation costs O(n^2) for them. Logistic terms are stored individually.
class LossSum {
 public:
  explicit LossSum(const Geometry& geometry)
      : geometry_(geometry), n_(geometry.dim()), quad_(n_ * n_, 0.0), lin_(n_, 0.0) {}

  void add(const LossFunction& f) {
    if (f.dim() != n_) throw DimensionMismatch("loss dimension differs from geometry");
    ++count_;
    if (f.kind() == LossKind::Logistic) {
      logistic_.push_back(f);
      return;
    }
    const Vector& b = f.feature();
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) quad_[i * n_ + j] += b[i] * b[j];
      lin_[i] += f.target() * b[i];
    }
    constant_ += 0.5 * f.target() * f.target();
    if (f.kind() == LossKind::RegularizedSquared) {
      if (f.anchor_geometry()->kind() != geometry_.kind())
        throw InvalidInput("regularized loss anchored to a different geometry");
      psi_weight_ += f.gamma();
    }
    has_quadratic_ = true;
  }

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  const Geometry& geometry() const { return geometry_; }

  double value(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& f : logistic_) s += f.value(x);
    if (has_quadratic_) {
      double q = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) row += quad_[i * n_ + j] * x[j];
        q += x[i] * (0.5 * row - lin_[i]);
      }
      s += q + constant_;
    }
    if (psi_weight_ > 0.0) s += psi_weight_ * geometry_.psi(x);
    return s;
  }

  Vector gradient(std::span<const double> x) const {
    Vector g(n_, 0.0);
    for (const auto& f : logistic_) {
      const double m = vec::dot(f.feature(), x);
      const double y = f.target();
      vec::axpy(-y * LossFunction::sigmoid(-y * m), f.feature(), g);
    }
    if (has_quadratic_) {
      for (std::size_t i = 0; i < n_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) row += quad_[i * n_ + j] * x[j];
        g[i] += row - lin_[i];
      }
    }
    if (psi_weight_ > 0.0) vec::axpy(psi_weight_, geometry_.psi_grad(x), g);
    return g;
  }

 private:
  Geometry geometry_;
  std::size_t n_;
  std::size_t count_ = 0;
  std::vector<LossFunction> logistic_;
  Vector quad_;
  Vector lin_;
  double constant_ = 0.0;
  double psi_weight_ = 0.0;
  bool has_quadratic_ = false;
};

/// sum of losses + psi / eta: the regularized-leader objective.
class RegularizedLeaderObjective {
 public:
  RegularizedLeaderObjective(const LossSum& losses, double eta) : losses_(&losses), eta_(eta) {}
  double value(std::span<const double> x) const {
    return losses_->value(x) + losses_->geometry().psi(x) / eta_;
  }
  Vector gradient(std::span<const double> x) const {
    Vector g = losses_->gradient(x);
    vec::axpy(1.0 / eta_, losses_->geometry().psi_grad(x), g);
    return g;
  }

 private:
  const LossSum* losses_;
  double eta_;
};

}  // namespace delayoco
