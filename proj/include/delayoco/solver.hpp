#pragma once

#include <concepts>
#include <functional>
#include <utility>

#include "delayoco/geometry.hpp"

namespace delayoco {

/// Anything with a value and a gradient on the feasible set.
template <class F>
concept CompositeObjective = requires(const F& f, std::span<const double> x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
};

/// Type-erased objective, used where callers need to keep a handle around
/// (solve auditing, tests).
class AnyObjective {
 public:
  AnyObjective(std::function<double(std::span<const double>)> value,
               std::function<Vector(std::span<const double>)> gradient)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}

  template <CompositeObjective F>
    requires(!std::same_as<std::remove_cvref_t<F>, AnyObjective>)
  explicit AnyObjective(F f)
      : AnyObjective([f](std::span<const double> x) { return f.value(x); },
                     [f](std::span<const double> x) { return f.gradient(x); }) {}

  double value(std::span<const double> x) const { return value_(x); }
  Vector gradient(std::span<const double> x) const { return gradient_(x); }

 private:
  std::function<double(std::span<const double>)> value_;
  std::function<Vector(std::span<const double>)> gradient_;
};

/// <g, z> + B(z; anchor) / eta, the per-step objective of every mirror-descent update.
class MirrorObjective {
 public:
  MirrorObjective(const Geometry& geometry, Vector g, DecisionVector anchor, double eta)
      : geometry_(&geometry), g_(std::move(g)), anchor_(std::move(anchor)), eta_(eta),
        anchor_grad_(geometry.psi_grad(anchor_)) {}

  double value(std::span<const double> z) const {
    return vec::dot(g_, z) + geometry_->bregman(z, anchor_) / eta_;
  }
  Vector gradient(std::span<const double> z) const {
    Vector r = geometry_->psi_grad(z);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = g_[i] + (r[i] - anchor_grad_[i]) / eta_;
    return r;
  }
  double eta() const { return eta_; }

 private:
  const Geometry* geometry_;
  Vector g_;
  DecisionVector anchor_;
  double eta_;
  Vector anchor_grad_;
};

struct SolverOptions {
  int max_inner_iters = 10'000;
};

struct SolveResult {
  DecisionVector x;
  /// Certified upper bound on objective(x) - min objective.
  double gap_certificate = 0.0;
  int iterations = 0;
};

namespace detail {

/// Upper bound on F(z) - min F for convex F, from the linear lower model:
/// <g, z> - min_u <g, u>.
inline double linear_gap(const Geometry& geo, std::span<const double> z, std::span<const double> g) {
  return std::max(0.0, vec::dot(g, z) - geo.linear_min(g));
}

/// Upper bound on F(z) - min F when F(u) >= F(z) + <g, u - z> + mu B(u; z)
/// on the feasible set. The minimizer of that lower model is an exact mirror
/// step with size 1/mu.
inline double relative_model_gap(const Geometry& geo, std::span<const double> z,
                                 std::span<const double> g, double mu) {
  const DecisionVector u = geo.mirror_step(z, g, 1.0 / mu);
  const double gap = vec::dot(g, z) - vec::dot(g, u) - mu * geo.bregman(u, z);
  return std::max(0.0, gap);
}

}  // namespace detail

/// Certified gap at z: the smaller of the two valid lower-model bounds.
inline double gap_certificate(const Geometry& geo, std::span<const double> z, std::span<const double> g,
                              double relative_modulus) {
  double gap = detail::linear_gap(geo, z, g);
  if (relative_modulus > 0.0) gap = std::min(gap, detail::relative_model_gap(geo, z, g, relative_modulus));
  return gap;
}

/// Approximately minimizes `objective` over the feasible set to within `rho`.
///
/// Precondition: the objective is (strong_mod / sigma)-strongly convex
/// relative to psi, which implies strong_mod-strong convexity in the
/// geometry's norm. All objectives built by the learners have this form
/// (linear or convex losses plus a multiple of psi or of a Bregman term).
/// strong_mod = 0 is accepted and falls back to the linear-model certificate.
///
/// The method is mirror descent with a backtracked relative-smoothness
/// constant; it stops as soon as the certified gap is <= rho.
template <CompositeObjective F>
SolveResult approx_argmin(const Geometry& geo, const F& objective, double strong_mod, double rho,
                          std::span<const double> warm_start, const SolverOptions& options = {}) {
  if (!(strong_mod >= 0.0) || !std::isfinite(strong_mod)) throw InvalidInput("strong_mod must be >= 0");
  if (!(rho > 0.0)) throw InvalidInput("rho must be positive");
  const double mu = strong_mod / geo.sigma();

  DecisionVector z = geo.repair(warm_start);
  const double smooth_floor = mu > 0.0 ? mu : 1e-8;
  double smooth = mu > 0.0 ? mu : 1.0;
  double fz = objective.value(z);
  double cert = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= options.max_inner_iters; ++it) {
    const Vector g = objective.gradient(z);
    cert = gap_certificate(geo, z, g, mu);
    if (cert <= rho) return {std::move(z), cert, it};
    if (it == options.max_inner_iters) break;

    const double slack = 1e-13 * (1.0 + std::abs(fz));
    bool backtracked = false;
    for (;;) {
      DecisionVector trial = geo.mirror_step(z, g, 1.0 / smooth);
      const double ft = objective.value(trial);
      const double model = fz + vec::dot(g, trial) - vec::dot(g, z) + smooth * geo.bregman(trial, z);
      if (ft <= model + slack) {
        z = std::move(trial);
        fz = ft;
        break;
      }
      smooth *= 2.0;
      backtracked = true;
      if (smooth > 1e30) throw CertificateNotReached("inner solver: smoothness estimate diverged", cert, rho);
    }
    if (!backtracked) smooth = std::max(smooth_floor, 0.5 * smooth);
  }
  throw CertificateNotReached("inner solver hit max_inner_iters with gap " + std::to_string(cert) +
                                  " > rho " + std::to_string(rho),
                              cert, rho);
}

}  // namespace delayoco
