#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "delayoco/core.hpp"

namespace delayoco {

/// Simplex coordinates are floored at this value (then renormalized) before
/// any logarithm or division. The entropic regularizer is undefined on the
/// simplex boundary.
inline constexpr double kSimplexFloor = 1e-12;

enum class SetKind { EuclideanBall, ProbabilitySimplex, PNormBall };

inline std::string to_string(SetKind k) {
  switch (k) {
    case SetKind::EuclideanBall: return "euclidean";
    case SetKind::ProbabilitySimplex: return "simplex";
    case SetKind::PNormBall: return "pnorm";
  }
  return "?";
}

/// Closed convex decision set. Radius and exponent are ignored where they do
/// not apply (the simplex has unit 1-norm by construction).
struct FeasibleSet {
  SetKind kind = SetKind::EuclideanBall;
  std::size_t dim = 1;
  double radius = 1.0;
  double p = 2.0;

  static FeasibleSet euclidean_ball(std::size_t n, double radius) {
    if (n == 0) throw InvalidInput("dimension must be positive");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidInput("ball radius must be >= 0");
    return {SetKind::EuclideanBall, n, radius, 2.0};
  }
  static FeasibleSet simplex(std::size_t n) {
    if (n == 0) throw InvalidInput("dimension must be positive");
    return {SetKind::ProbabilitySimplex, n, 1.0, 1.0};
  }
  static FeasibleSet pnorm_ball(std::size_t n, double radius, double p) {
    if (n == 0) throw InvalidInput("dimension must be positive");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidInput("ball radius must be >= 0");
    if (!(p > 1.0 && p <= 2.0)) throw InvalidInput("p-norm exponent must lie in (1, 2]");
    return {SetKind::PNormBall, n, radius, p};
  }

  bool contains(std::span<const double> x, double tol = 1e-9) const {
    if (x.size() != dim) return false;
    for (double v : x)
      if (!std::isfinite(v)) return false;
    switch (kind) {
      case SetKind::EuclideanBall: return vec::norm2(x) <= radius * (1.0 + tol) + tol;
      case SetKind::PNormBall: return vec::norm_p(x, p) <= radius * (1.0 + tol) + tol;
      case SetKind::ProbabilitySimplex: {
        for (double v : x)
          if (v < -tol) return false;
        return std::abs(vec::sum(x) - 1.0) <= std::max(tol, 1e-9);
      }
    }
    return false;
  }
};

/// Regularizer psi together with its feasible set.
///
///   Euclidean ball:  psi(x) = 1/2 |x|_2^2,                  sigma = 1 w.r.t. |.|_2
///   simplex:         psi(x) = sum x_i ln x_i + ln n,        sigma = 1 w.r.t. |.|_1
///   p-norm ball:     psi(x) = 1/2 |x|_p^2,                  sigma = p-1 w.r.t. |.|_p
///
/// Immutable after construction; every member function is pure.
class Geometry {
 public:
  explicit Geometry(FeasibleSet set) : set_(set) {
    if (set_.kind == SetKind::PNormBall) q_ = set_.p / (set_.p - 1.0);
    else if (set_.kind == SetKind::ProbabilitySimplex) q_ = std::numeric_limits<double>::infinity();
    else q_ = 2.0;
  }

  static Geometry euclidean(std::size_t n, double radius) {
    return Geometry(FeasibleSet::euclidean_ball(n, radius));
  }
  static Geometry simplex(std::size_t n) { return Geometry(FeasibleSet::simplex(n)); }
  static Geometry pnorm(std::size_t n, double radius, double p) {
    return Geometry(FeasibleSet::pnorm_ball(n, radius, p));
  }

  const FeasibleSet& feasible() const { return set_; }
  SetKind kind() const { return set_.kind; }
  std::size_t dim() const { return set_.dim; }
  double p() const { return set_.p; }
  /// Dual exponent: 1/p + 1/q = 1 (2 for Euclidean, inf for the simplex).
  double dual_exponent() const { return q_; }

  double sigma() const { return set_.kind == SetKind::PNormBall ? set_.p - 1.0 : 1.0; }

  /// Bound R on the primal norm over the feasible set.
  double radius() const { return set_.kind == SetKind::ProbabilitySimplex ? 1.0 : set_.radius; }

  std::string name() const {
    if (set_.kind == SetKind::PNormBall) return "pnorm(p=" + fmt_num(set_.p) + ")";
    return to_string(set_.kind);
  }

  double norm(std::span<const double> x) const {
    switch (set_.kind) {
      case SetKind::EuclideanBall: return vec::norm2(x);
      case SetKind::ProbabilitySimplex: return vec::norm1(x);
      case SetKind::PNormBall: return vec::norm_p(x, set_.p);
    }
    return 0.0;
  }

  double dual_norm(std::span<const double> g) const {
    switch (set_.kind) {
      case SetKind::EuclideanBall: return vec::norm2(g);
      case SetKind::ProbabilitySimplex: return vec::norm_inf(g);
      case SetKind::PNormBall: return vec::norm_p(g, q_);
    }
    return 0.0;
  }

  /// Starting decision used by every algorithm: the origin for the balls, the
  /// uniform distribution for the simplex.
  DecisionVector initial_point() const {
    if (set_.kind == SetKind::ProbabilitySimplex)
      return DecisionVector(set_.dim, 1.0 / static_cast<double>(set_.dim));
    return DecisionVector(set_.dim, 0.0);
  }

  double psi(std::span<const double> x) const {
    check(x);
    switch (set_.kind) {
      case SetKind::EuclideanBall: {
        const double n = vec::norm2(x);
        return 0.5 * n * n;
      }
      case SetKind::ProbabilitySimplex: {
        double s = std::log(static_cast<double>(set_.dim));
        for (double v : x)
          if (v > 0.0) s += v * std::log(v);
        return s;
      }
      case SetKind::PNormBall: {
        const double n = vec::norm_p(x, set_.p);
        return 0.5 * n * n;
      }
    }
    return 0.0;
  }

  Vector psi_grad(std::span<const double> x) const {
    check(x);
    switch (set_.kind) {
      case SetKind::EuclideanBall: return Vector(x.begin(), x.end());
      case SetKind::ProbabilitySimplex: {
        Vector r = floored(x);
        for (double& v : r) v = 1.0 + std::log(v);
        return r;
      }
      case SetKind::PNormBall: return link(x, set_.p);
    }
    return {};
  }

  /// Inverse of psi_grad on the whole space (no feasibility step).
  Vector psi_grad_inverse(std::span<const double> theta) const {
    switch (set_.kind) {
      case SetKind::EuclideanBall: return Vector(theta.begin(), theta.end());
      case SetKind::ProbabilitySimplex: {
        Vector r(theta.begin(), theta.end());
        for (double& v : r) v = std::exp(v - 1.0);
        return r;
      }
      case SetKind::PNormBall: return link(theta, q_);
    }
    return {};
  }

  /// B(x; y) = psi(x) - psi(y) - <grad psi(y), x - y>.
  double bregman(std::span<const double> x, std::span<const double> y) const {
    check(x);
    check(y);
    switch (set_.kind) {
      case SetKind::EuclideanBall: {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return 0.5 * s;
      }
      case SetKind::ProbabilitySimplex: {
        // generalized KL; reduces to KL(x || y) when both sum to one
        const Vector yf = floored(y);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (x[i] > 0.0) s += x[i] * std::log(x[i] / yf[i]);
          s += yf[i] - x[i];
        }
        return std::max(0.0, s);
      }
      case SetKind::PNormBall: {
        const Vector gy = link(y, set_.p);
        double s = psi(x) - psi(y);
        for (std::size_t i = 0; i < x.size(); ++i) s -= gy[i] * (x[i] - y[i]);
        return std::max(0.0, s);
      }
    }
    return 0.0;
  }

  /// Exact minimizer of <g, z> + B(z; x) / eta over the feasible set.
  ///
  /// Euclidean: radial projection of x - eta g. Simplex: exponentiated
  /// gradient. p-norm: dual-map step followed by radial scaling; since psi is
  /// 2-homogeneous its gradient is 1-homogeneous and radial scaling is the
  /// exact Bregman projection onto the p-norm ball.
  DecisionVector mirror_step(std::span<const double> x, std::span<const double> g, double eta) const {
    check(x);
    vec::require_same_dim(x, g);
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("mirror step size must be positive");
    switch (set_.kind) {
      case SetKind::EuclideanBall: {
        DecisionVector z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - eta * g[i];
        scale_into_ball(z, 2.0);
        return z;
      }
      case SetKind::ProbabilitySimplex: {
        DecisionVector z = floored(x);
        double gmin = g[0];
        for (double v : g) gmin = std::min(gmin, v);
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
          z[i] *= std::exp(-eta * (g[i] - gmin));
          s += z[i];
        }
        for (double& v : z) v /= s;
        return floored(z);
      }
      case SetKind::PNormBall: {
        Vector theta = link(x, set_.p);
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= eta * g[i];
        DecisionVector z = link(theta, q_);
        scale_into_ball(z, set_.p);
        return z;
      }
    }
    return {};
  }

  /// min over the feasible set of <g, u>.
  double linear_min(std::span<const double> g) const {
    switch (set_.kind) {
      case SetKind::EuclideanBall: return -set_.radius * vec::norm2(g);
      case SetKind::ProbabilitySimplex: return *std::min_element(g.begin(), g.end());
      case SetKind::PNormBall: return -set_.radius * vec::norm_p(g, q_);
    }
    return 0.0;
  }

  /// Cheapest feasibility repair: simplex clamp-and-renormalize, balls radial scaling.
  DecisionVector repair(std::span<const double> x) const {
    check(x);
    DecisionVector z(x.begin(), x.end());
    switch (set_.kind) {
      case SetKind::EuclideanBall: scale_into_ball(z, 2.0); break;
      case SetKind::PNormBall: scale_into_ball(z, set_.p); break;
      case SetKind::ProbabilitySimplex: z = floored(z); break;
    }
    return z;
  }

  /// Euclidean (not Bregman) projection onto the feasible set.
  DecisionVector euclidean_projection(std::span<const double> v) const {
    check(v);
    switch (set_.kind) {
      case SetKind::EuclideanBall: {
        DecisionVector z(v.begin(), v.end());
        scale_into_ball(z, 2.0);
        return z;
      }
      case SetKind::ProbabilitySimplex: return project_simplex(v);
      case SetKind::PNormBall: return project_pball(v);
    }
    return {};
  }

  /// Floor-and-renormalize used before every log or division on the simplex.
  static DecisionVector floored(std::span<const double> x) {
    DecisionVector r(x.begin(), x.end());
    double s = 0.0;
    for (double& v : r) {
      v = std::max(v, kSimplexFloor);
      s += v;
    }
    for (double& v : r) v /= s;
    return r;
  }

 private:
  void check(std::span<const double> x) const {
    if (x.size() != set_.dim)
      throw DimensionMismatch("expected dimension " + std::to_string(set_.dim) + ", got " +
                              std::to_string(x.size()));
    vec::require_finite(x);
  }

  // gradient of 1/2 |x|_r^2: sign(x_i) |x_i|^{r-1} |x|_r^{2-r}
  static Vector link(std::span<const double> x, double r) {
    Vector out(x.size(), 0.0);
    const double n = vec::norm_p(x, r);
    if (n == 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) continue;
      // |x_i|^{r-1} n^{2-r} written as n * (|x_i|/n)^{r-1} to stay in range
      const double mag = n * std::pow(std::abs(x[i]) / n, r - 1.0);
      out[i] = std::copysign(mag, x[i]);
    }
    return out;
  }

  void scale_into_ball(DecisionVector& z, double r) const {
    const double n = vec::norm_p(z, r);
    if (n > set_.radius) {
      const double s = set_.radius / n;
      for (double& v : z) v *= s;
    }
  }

  static DecisionVector project_simplex(std::span<const double> v) {
    Vector u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      cum += u[j];
      const double t = (cum - 1.0) / static_cast<double>(j + 1);
      if (u[j] - t > 0.0) tau = t;
    }
    DecisionVector z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::max(v[i] - tau, 0.0);
    return z;
  }

  // argmin 1/2|z - v|^2 s.t. |z|_p <= R. KKT: z_i = sign(v_i) s_i with
  // s_i + lambda p s_i^{p-1} = |v_i|; the multiplier is found by bisection.
  DecisionVector project_pball(std::span<const double> v) const {
    DecisionVector z(v.begin(), v.end());
    const double p = set_.p, R = set_.radius;
    if (vec::norm_p(v, p) <= R) return z;
    if (R == 0.0) return DecisionVector(v.size(), 0.0);
    auto magnitudes = [&](double lambda) {
      Vector s(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        double lo = 0.0, hi = a;
        for (int it = 0; it < 100 && hi - lo > 1e-16 * std::max(1.0, a); ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid + lambda * p * std::pow(mid, p - 1.0) > a) hi = mid;
          else lo = mid;
        }
        s[i] = 0.5 * (lo + hi);
      }
      return s;
    };
    double lo = 0.0, hi = 1.0;
    while (vec::norm_p(magnitudes(hi), p) > R) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (vec::norm_p(magnitudes(mid), p) > R) lo = mid;
      else hi = mid;
    }
    const Vector s = magnitudes(hi);
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::copysign(s[i], v[i]);
    scale_into_ball(z, p);
    return z;
  }

  static std::string fmt_num(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  FeasibleSet set_;
  double q_ = 2.0;
};

}  // namespace delayoco
