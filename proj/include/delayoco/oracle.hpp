#pragma once

#include <Eigen/Dense>

#include "delayoco/learner.hpp"

namespace delayoco {

/// Offline best decision in hindsight.
struct ComparatorSolution {
  DecisionVector x_star;
  double objective_value = 0.0;  // (1/T) sum_t f_t(x_star)
  double solver_gap = 0.0;       // certified bound on the averaged objective
};

inline constexpr double kComparatorTolerance = 1e-10;

namespace detail {

class AverageLoss {
 public:
  AverageLoss(const std::vector<LossFunction>& losses, const Geometry& geo) : sum_(geo), scale_(1.0 / losses.size()) {
    for (const auto& f : losses) sum_.add(f);
  }
  double value(std::span<const double> x) const { return scale_ * sum_.value(x); }
  Vector gradient(std::span<const double> x) const { return vec::scaled(sum_.gradient(x), scale_); }

 private:
  LossSum sum_;
  double scale_;
};

/// Three deterministic interior starting points.
inline std::vector<DecisionVector> multistart_points(const Geometry& geo) {
  const std::size_t n = geo.dim();
  std::vector<DecisionVector> pts;
  pts.push_back(geo.initial_point());
  if (geo.kind() == SetKind::ProbabilitySimplex) {
    DecisionVector a(n), b(n);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(i + 1);
      b[i] = static_cast<double>(n - i);
      sa += a[i];
      sb += b[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    pts.push_back(a);
    pts.push_back(b);
  } else {
    DecisionVector a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = (i % 2 == 0) ? 1.0 : -1.0;
      b[i] = -a[i];
    }
    const double s = 0.5 * geo.radius() / std::max(geo.norm(a), 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] *= s;
      b[i] *= s;
    }
    pts.push_back(a);
    pts.push_back(b);
  }
  return pts;
}

}  // namespace detail

/// Accelerated projected gradient with backtracking and adaptive restart,
/// stopped on the linear-model gap. Used for the unregularized comparator,
/// where mirror steps crawl along nearly active simplex faces.
template <CompositeObjective F>
SolveResult projected_gradient_argmin(const Geometry& geo, const F& objective, double tol,
                                      std::span<const double> start, int max_iters) {
  DecisionVector x = geo.euclidean_projection(start);
  DecisionVector y = x;
  double L = 1.0, momentum = 1.0;
  double cert = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= max_iters; ++it) {
    cert = detail::linear_gap(geo, x, objective.gradient(x));
    if (cert <= tol) return {std::move(x), cert, it};
    if (it == max_iters) break;

    const Vector gy = objective.gradient(y);
    const double fy = objective.value(y);
    DecisionVector next;
    for (;;) {
      DecisionVector v = y;
      vec::axpy(-1.0 / L, gy, v);
      next = geo.euclidean_projection(v);
      const Vector step = vec::sub(next, y);
      const double model = fy + vec::dot(gy, step) + 0.5 * L * vec::dot(step, step);
      if (objective.value(next) <= model + 1e-14 * (1.0 + std::abs(fy))) break;
      L *= 2.0;
      if (L > 1e30) throw CertificateNotReached("comparator: smoothness estimate diverged", cert, tol);
    }
    const Vector from_y = vec::sub(y, next), moved = vec::sub(next, x);
    if (vec::dot(from_y, moved) > 0.0) {  // restart
      momentum = 1.0;
      y = next;
    } else {
      const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      DecisionVector z = next;
      vec::axpy((momentum - 1.0) / m_next, moved, z);
      y = geo.euclidean_projection(z);
      momentum = m_next;
    }
    x = std::move(next);
    L = std::max(1e-8, 0.9 * L);
  }
  throw CertificateNotReached("comparator hit the iteration cap with gap " + std::to_string(cert), cert, tol);
}

/// x* = argmin over the feasible set of (1/T) sum_t f_t, certified to 1e-10
/// and multi-started from three interior points (best kept). Regularized
/// streams are solved by mirror descent with their relative modulus; the rest
/// by accelerated projected gradient.
inline ComparatorSolution solve_comparator(const std::vector<LossFunction>& losses, const Geometry& geo,
                                           int max_iters = 200'000) {
  if (losses.empty()) throw InvalidInput("comparator needs at least one loss");
  const detail::AverageLoss objective(losses, geo);
  double relative = 0.0;
  for (const auto& f : losses)
    if (f.kind() == LossKind::RegularizedSquared) relative += f.gamma();
  relative /= static_cast<double>(losses.size());
  SolverOptions opts;
  opts.max_inner_iters = max_iters;
  std::optional<ComparatorSolution> best;
  for (const auto& start : detail::multistart_points(geo)) {
    SolveResult r = relative > 0.0
                        ? approx_argmin(geo, objective, relative * geo.sigma(), kComparatorTolerance, start, opts)
                        : projected_gradient_argmin(geo, objective, kComparatorTolerance, start, max_iters);
    const double v = objective.value(r.x);
    if (!best || v < best->objective_value) best = ComparatorSolution{std::move(r.x), v, r.gap_certificate};
  }
  return *best;
}

/// Metadata attached to every regret trace by the harness.
struct TraceMetadata {
  int tail_dropped = 0;
  long long total_delay = 0;
  int max_delay = 0;
  double eta = 0.0;          // fixed rate, 0 for time-varying schedules
  double measured_g = 0.0;   // max_t |grad f_t(x_t)|_* over the run (and at x*)
  double analytic_g = 0.0;   // max_t grad_bound(f_t)
  double xi = 0.0;
  double theorem_bound = 0.0;           // evaluated with measured_g
  double theorem_bound_analytic = 0.0;  // evaluated with analytic_g
  long long solve_count = 0;
  long long feedback_count = 0;
};

/// Per-round cumulative and time-averaged regret against a fixed comparator.
struct RegretTrace {
  std::string algo;
  std::uint64_t seed = 0;
  int d = 0;
  double C = 0.0;
  std::string geometry;
  std::string task;
  std::vector<double> cumulative;  // Reg_t, t = 1..T
  std::vector<double> average;     // Reg_t / t
  TraceMetadata meta;

  int horizon() const { return static_cast<int>(cumulative.size()); }
  double final_average() const { return average.empty() ? 0.0 : average.back(); }
  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

inline RegretTrace regret_curve(const std::vector<DecisionVector>& decisions, const std::vector<LossFunction>& losses,
                                std::span<const double> x_star) {
  if (decisions.size() != losses.size())
    throw DimensionMismatch("regret curve needs one decision per loss (" + std::to_string(decisions.size()) +
                            " vs " + std::to_string(losses.size()) + ")");
  RegretTrace tr;
  tr.cumulative.reserve(losses.size());
  tr.average.reserve(losses.size());
  double cum = 0.0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    cum += losses[t].value(decisions[t]) - losses[t].value(x_star);
    tr.cumulative.push_back(cum);
    tr.average.push_back(cum / static_cast<double>(t + 1));
  }
  return tr;
}

/// Constants entering the regret bounds. Unused fields may stay NaN.
struct TheoremConstants {
  double eta = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double g_star = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  double radius = std::numeric_limits<double>::quiet_NaN();
  long long T = 0;
  long long total_delay = -1;
  int max_delay = 0;
  double psi_star = std::numeric_limits<double>::quiet_NaN();       // psi(x*)
  double psi_init = std::numeric_limits<double>::quiet_NaN();       // psi(x_1)
  double bregman_star = std::numeric_limits<double>::quiet_NaN();   // B(x*; x_1)
};

struct TheoremBound {
  Algorithm algo;
  double bound_value;
  TheoremConstants constants;
};

namespace detail {
inline double need(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidInput(std::string("theorem bound: missing constant ") + name);
  return v;
}
}  // namespace detail

/// Closed-form regret bounds, evaluated exactly as stated for each algorithm.
/// DOGD and DOGD-SC use their Euclidean analogues (G R sqrt(2T + 8 D_T) and
/// 3 d G^2 (1 + ln T) / gamma).
inline TheoremBound theorem_bound(Algorithm algo, const TheoremConstants& c) {
  using detail::need;
  if (c.T <= 0) throw InvalidInput("theorem bound: missing constant T");
  const double T = static_cast<double>(c.T);
  const double G = need(c.g_star, "g_star");
  double v = 0.0;
  auto needD = [&] {
    if (c.total_delay < 0) throw InvalidInput("theorem bound: missing constant D_T");
    return static_cast<double>(c.total_delay);
  };
  auto needd = [&] {
    if (c.max_delay <= 0) throw InvalidInput("theorem bound: missing constant d");
    return static_cast<double>(c.max_delay);
  };
  switch (algo) {
    case Algorithm::FtdrlGc: {
      const double eta = need(c.eta, "eta"), sigma = need(c.sigma, "sigma"), D = needD();
      v = eta * G * G * (T + 4.0 * D) / sigma + (need(c.psi_star, "psi_star") - need(c.psi_init, "psi_init")) / eta;
      break;
    }
    case Algorithm::FtdlRsc: {
      const double sigma = need(c.sigma, "sigma"), gamma = need(c.gamma, "gamma"), d = needd();
      v = 3.0 * d * G * G / (sigma * gamma) * (1.0 + std::log(T));
      break;
    }
    case Algorithm::DmdGc:
    case Algorithm::SdmdGc: {
      const double eta = need(c.eta, "eta"), sigma = need(c.sigma, "sigma"), xi = need(c.xi, "xi"),
                   R = need(c.radius, "radius"), D = needD(), B = need(c.bregman_star, "bregman_star");
      v = eta * (G * G * T + 8.0 * xi * R * G * T + 2.0 * eta * G * T + 4.0 * G * G * D + 8.0 * eta * G * D) /
              (2.0 * sigma) +
          2.0 * eta * eta * xi * G * G * D / (sigma * sigma) + B / eta;
      break;
    }
    case Algorithm::DmdRsc:
    case Algorithm::SdmdRsc: {
      const double sigma = need(c.sigma, "sigma"), gamma = need(c.gamma, "gamma"), xi = need(c.xi, "xi"),
                   R = need(c.radius, "radius"), d = needd();
      v = (3.0 * d * G * G + 8.0 * xi * R * G) * (1.0 + std::log(T)) / (2.0 * sigma * gamma) +
          6.0 * d * G / (sigma * gamma * gamma);
      // the two theorems differ in the last term: G^2 for DMD-RSC, G for SDMD-RSC
      const double last = algo == Algorithm::DmdRsc ? G * G : G;
      v += 2.0 * d * xi * last / (sigma * sigma * gamma * gamma);
      break;
    }
    case Algorithm::Dogd: v = G * need(c.radius, "radius") * std::sqrt(2.0 * T + 8.0 * needD()); break;
    case Algorithm::DogdSc: v = 3.0 * needd() * G * G * (1.0 + std::log(T)) / need(c.gamma, "gamma"); break;
  }
  return {algo, v, c};
}

/// Closed-form regret of FTDRL-GC at its tuned rate, per geometry.
inline double ftdrl_corollary_bound(const Geometry& geo, double radius, double g_star, long long T, long long D) {
  const double t = static_cast<double>(T), d = static_cast<double>(D);
  switch (geo.kind()) {
    case SetKind::EuclideanBall: return g_star * radius * std::sqrt(2.0 * t + 8.0 * d);
    case SetKind::ProbabilitySimplex:
      return 2.0 * g_star * std::sqrt((t + 4.0 * d) * std::log(static_cast<double>(geo.dim())));
    case SetKind::PNormBall: return radius * g_star * std::sqrt((2.0 * t + 8.0 * d) / (geo.p() - 1.0));
  }
  return 0.0;
}

/// Max relative error |fd - grad| / max(1, |grad|) of central differences over
/// the given points. The step actually taken is recomputed after rounding.
template <class Value, class Grad>
double finite_diff_check(Value&& value, Grad&& grad, const std::vector<Vector>& points, double h = 1e-6) {
  double worst = 0.0;
  for (const Vector& x : points) {
    const Vector g = grad(std::span<const double>(x));
    Vector xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      const double step = xp[i] - xm[i];
      const double fd = (value(std::span<const double>(xp)) - value(std::span<const double>(xm))) / step;
      worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
      xp[i] = x[i];
      xm[i] = x[i];
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Independent references. These share no code path with the learners.

/// argmin 1/2 x'Ax - c'x + lambda/2 |x|^2 over |x|_2 <= R, via a Cholesky solve
/// and bisection on the ball multiplier.
inline Vector ridge_on_ball(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, double lambda, double R) {
  const auto n = A.rows();
  auto solve = [&](double mult) {
    Eigen::MatrixXd M = A + (lambda + mult) * Eigen::MatrixXd::Identity(n, n);
    return Eigen::VectorXd(M.llt().solve(c));
  };
  Eigen::VectorXd x = solve(0.0);
  if (x.norm() > R) {
    double lo = 0.0, hi = 1.0;
    while (solve(hi).norm() > R) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (solve(mid).norm() > R) lo = mid;
      else hi = mid;
    }
    x = solve(hi);
  }
  return Vector(x.data(), x.data() + n);
}

/// Non-delayed FTRL with psi = 1/2|x|^2 on the Euclidean ball for squared
/// (optionally regularized) losses: x_{t+1} = argmin sum_{tau<=t} f_tau + psi/eta.
/// Returns x_1 .. x_{T+1}.
inline std::vector<DecisionVector> reference_ftrl_euclidean(const std::vector<LossFunction>& losses, double eta,
                                                            double R) {
  if (losses.empty()) return {};
  const auto n = static_cast<Eigen::Index>(losses.front().dim());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  double reg = 1.0 / eta;
  std::vector<DecisionVector> xs{DecisionVector(static_cast<std::size_t>(n), 0.0)};
  for (const auto& f : losses) {
    if (f.kind() == LossKind::Logistic) throw InvalidInput("reference FTRL handles squared losses only");
    const Eigen::Map<const Eigen::VectorXd> b(f.feature().data(), n);
    A += b * b.transpose();
    c += f.target() * b;
    if (f.kind() == LossKind::RegularizedSquared) reg += f.gamma();
    xs.push_back(ridge_on_ball(A, c, reg, R));
  }
  return xs;
}

/// Non-delayed OMD: x_{t+1} = argmin <grad f_t(x_t), x> + B(x; x_t)/eta,
/// written out directly for the Euclidean ball and the simplex.
inline std::vector<DecisionVector> reference_omd(const std::vector<LossFunction>& losses, const Geometry& geo,
                                                 double eta) {
  std::vector<DecisionVector> xs{geo.initial_point()};
  for (const auto& f : losses) {
    const DecisionVector& x = xs.back();
    const Vector g = f.gradient(x);
    DecisionVector next(x.size());
    if (geo.kind() == SetKind::EuclideanBall) {
      double nn = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        next[i] = x[i] - eta * g[i];
        nn += next[i] * next[i];
      }
      nn = std::sqrt(nn);
      if (nn > geo.radius())
        for (double& v : next) v *= geo.radius() / nn;
    } else if (geo.kind() == SetKind::ProbabilitySimplex) {
      // softmax(log x - eta g)
      Vector logits(x.size());
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i) {
        logits[i] = std::log(std::max(x[i], kSimplexFloor)) - eta * g[i];
        top = std::max(top, logits[i]);
      }
      double z = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) z += std::exp(logits[i] - top);
      for (std::size_t i = 0; i < x.size(); ++i) next[i] = std::max(std::exp(logits[i] - top) / z, kSimplexFloor);
      const double s = vec::sum(next);
      for (double& v : next) v /= s;
    } else {
      throw InvalidInput("reference OMD covers the Euclidean ball and the simplex");
    }
    xs.push_back(std::move(next));
  }
  return xs;
}

}  // namespace delayoco
