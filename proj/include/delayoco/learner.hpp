#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string_view>

#include "delayoco/delay.hpp"
#include "delayoco/solver.hpp"

namespace delayoco {

enum class Algorithm { FtdrlGc, FtdlRsc, DmdGc, DmdRsc, SdmdGc, SdmdRsc, Dogd, DogdSc };

inline constexpr std::array<Algorithm, 8> kAllAlgorithms = {
    Algorithm::FtdrlGc, Algorithm::FtdlRsc, Algorithm::DmdGc, Algorithm::DmdRsc,
    Algorithm::SdmdGc,  Algorithm::SdmdRsc, Algorithm::Dogd,  Algorithm::DogdSc};

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FtdrlGc: return "FTDRL-GC";
    case Algorithm::FtdlRsc: return "FTDL-RSC";
    case Algorithm::DmdGc: return "DMD-GC";
    case Algorithm::DmdRsc: return "DMD-RSC";
    case Algorithm::SdmdGc: return "SDMD-GC";
    case Algorithm::SdmdRsc: return "SDMD-RSC";
    case Algorithm::Dogd: return "DOGD";
    case Algorithm::DogdSc: return "DOGD-SC";
  }
  return "?";
}

/// Case-insensitive; accepts "FTDRL-GC", "ftdrl_gc" and "ftdrlgc".
inline Algorithm parse_algorithm(std::string_view s) {
  std::string key;
  for (char c : s)
    if (c != '-' && c != '_') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (Algorithm a : kAllAlgorithms) {
    std::string name;
    for (char c : to_string(a))
      if (c != '-') name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == key) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline bool is_relative_strongly_convex(Algorithm a) {
  return a == Algorithm::FtdlRsc || a == Algorithm::DmdRsc || a == Algorithm::SdmdRsc || a == Algorithm::DogdSc;
}

/// Which feedback the algorithm queries: the loss, its gradient map, or the
/// gradient value at the decision that was played.
enum class FeedbackKind { FullLoss, GradientFn, GradientValue };

inline FeedbackKind feedback_kind(Algorithm a) {
  switch (a) {
    case Algorithm::FtdrlGc:
    case Algorithm::FtdlRsc: return FeedbackKind::FullLoss;
    case Algorithm::DmdGc:
    case Algorithm::DmdRsc: return FeedbackKind::GradientFn;
    default: return FeedbackKind::GradientValue;
  }
}

/// Stand-in for an exact inner solve.
inline constexpr double kExactRho = 1e-12;
/// Budgets are never asked below this multiple of 1 + |objective| at the warm
/// start: certificates are differences of numbers of that size.
inline constexpr double kRoundingFloor = 1e-14;

struct RhoSchedule {
  enum class Kind { TheoremDefault, NoiseInjection, Exact };
  Kind kind = Kind::TheoremDefault;
  double C = 0.0;         // NoiseInjection scale
  double exponent = 1.5;  // rho_t = C / t^exponent (1.5 classification, 3 regression)

  static RhoSchedule theorem() { return {}; }
  static RhoSchedule exact() { return {Kind::Exact, 0.0, 1.5}; }
  static RhoSchedule noise(double C, double exponent) {
    if (!(C >= 0.0)) throw InvalidInput("noise scale C must be >= 0");
    return {Kind::NoiseInjection, C, exponent};
  }
};

struct LearnerConfig {
  Algorithm algo = Algorithm::DmdGc;
  std::optional<double> eta;    // fixed rate of the GC variants and DOGD
  std::optional<double> gamma;  // relative strong convexity modulus of the RSC variants
  RhoSchedule rho;
  Geometry geometry = Geometry::euclidean(1, 1.0);
  double g_star = 1.0;  // dual-norm gradient bound used by the theorem budgets
  SolverOptions solver;
};

struct CorollaryInputs {
  long long T = 0;
  long long total_delay = 0;  // D_T
  double radius = 0.0;        // R in the geometry norm (Euclidean R_2 for DOGD)
  double g_star = 0.0;        // G in the dual norm (Euclidean G_2 for DOGD)
};

/// Oracle-tuned fixed learning rate of the general-convex variants.
inline double eta_for_corollary(const Geometry& geo, Algorithm algo, const CorollaryInputs& in) {
  if (in.T <= 0 || in.total_delay < 0) throw InvalidInput("corollary rate needs T >= 1 and D_T >= 0");
  if (!(in.g_star > 0.0)) throw InvalidInput("corollary rate needs a positive gradient bound");
  const double T = static_cast<double>(in.T), D = static_cast<double>(in.total_delay);
  const double lnn = std::log(static_cast<double>(geo.dim()));
  const bool needs_radius = algo == Algorithm::Dogd || geo.kind() != SetKind::ProbabilitySimplex;
  if (needs_radius && !(in.radius > 0.0)) throw InvalidInput("corollary rate needs a positive radius");
  switch (algo) {
    case Algorithm::Dogd: return in.radius / in.g_star * std::sqrt(1.0 / (2.0 * T + 8.0 * D));
    case Algorithm::FtdrlGc:
      switch (geo.kind()) {
        case SetKind::EuclideanBall: return in.radius / in.g_star * std::sqrt(1.0 / (2.0 * T + 8.0 * D));
        case SetKind::ProbabilitySimplex: return 1.0 / in.g_star * std::sqrt(lnn / (T + 4.0 * D));
        case SetKind::PNormBall:
          return in.radius / in.g_star * std::sqrt((geo.p() - 1.0) / (2.0 * T + 8.0 * D));
      }
      break;
    case Algorithm::DmdGc:
    case Algorithm::SdmdGc:
      switch (geo.kind()) {
        case SetKind::EuclideanBall: return in.radius / in.g_star * std::sqrt(1.0 / (T + 4.0 * D));
        case SetKind::ProbabilitySimplex: return 1.0 / in.g_star * std::sqrt(2.0 * lnn / (T + 4.0 * D));
        case SetKind::PNormBall: return in.radius / in.g_star * std::sqrt((geo.p() - 1.0) / (T + 4.0 * D));
      }
      break;
    default: break;
  }
  throw InvalidInput(to_string(algo) + " has no fixed corollary learning rate");
}

/// What a learner knows when it sets the budget of the step closing round t.
struct RoundState {
  int round = 1;                   // t
  std::size_t arrivals = 0;        // |F_t|
  long long feedback_total = 0;    // sum_{tau <= t} |F_tau|
  double eta = 0.0;                // eta or eta_t in force
};

/// Additive accuracy allowed for the inner solve(s) of round t.
inline double rho_for_theorem(const LearnerConfig& cfg, const RoundState& s) {
  switch (cfg.rho.kind) {
    case RhoSchedule::Kind::Exact: return kExactRho;
    case RhoSchedule::Kind::NoiseInjection: return cfg.rho.C / std::pow(static_cast<double>(s.round), cfg.rho.exponent);
    case RhoSchedule::Kind::TheoremDefault: break;
  }
  const double sigma = cfg.geometry.sigma();
  const double G = cfg.g_star;
  switch (cfg.algo) {
    case Algorithm::FtdrlGc: return s.eta * G * G / (8.0 * sigma);
    case Algorithm::FtdlRsc: {
      if (s.feedback_total <= 0) return 0.0;
      const double f = static_cast<double>(s.arrivals);
      return f * f * G * G / (8.0 * static_cast<double>(s.feedback_total) * cfg.gamma.value_or(0.0) * sigma);
    }
    case Algorithm::DmdGc:
    case Algorithm::SdmdGc:
    case Algorithm::DmdRsc:
    case Algorithm::SdmdRsc: return s.eta * s.eta * s.eta / (2.0 * sigma);
    case Algorithm::Dogd:
    case Algorithm::DogdSc: return 0.0;
  }
  return 0.0;
}

/// Passed to LearnerHooks::on_solve for every approximate inner solve.
struct SolveAudit {
  int round;
  int segment;
  const Geometry& geometry;
  const AnyObjective& objective;
  double strong_mod;
  double rho;
  std::span<const double> warm_start;
  const SolveResult& result;
};

struct LearnerHooks {
  std::function<void(const SolveAudit&)> on_solve;
  /// One call per inner update: x_{t,i} -> x_{t,i+1} (segment i of round t).
  std::function<void(int round, int segment, std::span<const double> from, std::span<const double> to)> on_segment;
};

/// One online learner. Round t: decision() is x_t; query(f_t) builds the
/// feedback item the algorithm asks for; step(F_t) consumes the feedback that
/// arrived at the end of round t and produces x_{t+1}.
class Learner {
 public:
  explicit Learner(LearnerConfig cfg, LearnerHooks hooks = {})
      : cfg_(std::move(cfg)), hooks_(std::move(hooks)), history_(cfg_.geometry) {
    const bool rsc = is_relative_strongly_convex(cfg_.algo);
    if (rsc && !(cfg_.gamma.has_value() && *cfg_.gamma > 0.0))
      throw ConfigError(to_string(cfg_.algo) + " requires gamma > 0");
    if (!rsc && !(cfg_.eta.has_value() && *cfg_.eta > 0.0))
      throw ConfigError(to_string(cfg_.algo) + " requires a fixed eta > 0");
    if (!(cfg_.g_star >= 0.0)) throw ConfigError("g_star must be >= 0");
    x_ = cfg_.geometry.initial_point();
  }

  const LearnerConfig& config() const { return cfg_; }
  const DecisionVector& decision() const { return x_; }
  int round() const { return round_; }
  long long feedback_count() const { return feedback_count_; }
  long long solve_count() const { return solve_count_; }

  FeedbackItem query(const LossFunction& f) const {
    switch (feedback_kind(cfg_.algo)) {
      case FeedbackKind::FullLoss: return {round_, FullLoss{f}};
      case FeedbackKind::GradientFn: return {round_, GradientFn{f}};
      case FeedbackKind::GradientValue: return {round_, GradientValue{f.gradient(x_)}};
    }
    return {round_, GradientValue{}};
  }

  const DecisionVector& step(const std::vector<FeedbackItem>& arrivals) {
    const int t = round_;
    ++round_;
    for (std::size_t i = 1; i < arrivals.size(); ++i)
      if (arrivals[i].origin_round <= arrivals[i - 1].origin_round)
        throw InvalidInput("arrival set must be strictly ascending in origin round");
    for (const auto& item : arrivals)
      if (item.origin_round > t) throw InvalidInput("feedback from the future");
    if (arrivals.empty()) return x_;  // idle: x_{t+1} = x_t
    feedback_count_ += static_cast<long long>(arrivals.size());

    switch (cfg_.algo) {
      case Algorithm::FtdrlGc: step_ftdrl_gc(t, arrivals); break;
      case Algorithm::FtdlRsc: step_ftdl_rsc(t, arrivals); break;
      case Algorithm::DmdGc: step_dmd_gc(t, arrivals); break;
      case Algorithm::DmdRsc: step_dmd_rsc(t, arrivals); break;
      case Algorithm::SdmdGc: step_sdmd_gc(t, arrivals); break;
      case Algorithm::SdmdRsc: step_sdmd_rsc(t, arrivals); break;
      case Algorithm::Dogd: step_dogd(t, arrivals, *cfg_.eta); break;
      case Algorithm::DogdSc: step_dogd(t, arrivals, 1.0 / (*cfg_.gamma * static_cast<double>(feedback_count_))); break;
    }
    inject_noise(t + 1);
    return x_;
  }

  /// Rate in force at the step closing round t, given the running feedback count.
  double rate(int t) const {
    switch (cfg_.algo) {
      case Algorithm::DmdRsc:
      case Algorithm::DogdSc: return 1.0 / (*cfg_.gamma * static_cast<double>(feedback_count_));
      case Algorithm::SdmdRsc: return 1.0 / (*cfg_.gamma * static_cast<double>(t));
      case Algorithm::FtdlRsc: return 0.0;
      default: return *cfg_.eta;
    }
  }

 private:
  double budget(int t, std::size_t arrivals) const {
    RoundState s{t, arrivals, feedback_count_, rate(t)};
    if (cfg_.rho.kind == RhoSchedule::Kind::NoiseInjection) s.round = t + 1;
    return std::max(rho_for_theorem(cfg_, s), kExactRho);
  }

  template <CompositeObjective F>
  DecisionVector solve(int t, int segment, const F& objective, double strong_mod, double rho) {
    ++solve_count_;
    rho = std::max(rho, kRoundingFloor * (1.0 + std::abs(objective.value(x_))));
    SolveResult r = approx_argmin(cfg_.geometry, objective, strong_mod, rho, x_, cfg_.solver);
    if (hooks_.on_solve) {
      const AnyObjective handle([&objective](std::span<const double> z) { return objective.value(z); },
                                [&objective](std::span<const double> z) { return objective.gradient(z); });
      hooks_.on_solve(SolveAudit{t, segment, cfg_.geometry, handle, strong_mod, rho, x_, r});
    }
    return std::move(r.x);
  }

  void advance(int t, int segment, DecisionVector next) {
    if (hooks_.on_segment) hooks_.on_segment(t, segment, x_, next);
    x_ = std::move(next);
  }

  // Mirror-descent update of x_ with the gradient g and rate eta: closed form
  // when the budget is at the exact level, certified approximate solve otherwise.
  void mirror_update(int t, int segment, const Vector& g, double eta, double rho) {
    if (rho <= kExactRho) {
      ++solve_count_;
      advance(t, segment, cfg_.geometry.mirror_step(x_, g, eta));
      return;
    }
    const MirrorObjective obj(cfg_.geometry, g, x_, eta);
    advance(t, segment, solve(t, segment, obj, cfg_.geometry.sigma() / eta, rho));
  }

  static const LossFunction& loss_of(const FeedbackItem& item) {
    if (const auto* f = std::get_if<FullLoss>(&item.payload)) return f->loss;
    if (const auto* f = std::get_if<GradientFn>(&item.payload)) return f->loss;
    throw InvalidInput("algorithm needs loss or gradient-map feedback");
  }
  static const Vector& value_of(const FeedbackItem& item) {
    if (const auto* g = std::get_if<GradientValue>(&item.payload)) return g->value;
    throw InvalidInput("algorithm needs gradient-value feedback");
  }

  void step_ftdrl_gc(int t, const std::vector<FeedbackItem>& arrivals) {
    const double eta = *cfg_.eta;
    const double rho = budget(t, arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      if (!std::holds_alternative<FullLoss>(arrivals[i].payload))
        throw InvalidInput("FTDRL-GC needs full-loss feedback");
      history_.add(loss_of(arrivals[i]));
      const RegularizedLeaderObjective obj(history_, eta);
      advance(t, static_cast<int>(i), solve(t, static_cast<int>(i), obj, cfg_.geometry.sigma() / eta, rho));
    }
  }

  void step_ftdl_rsc(int t, const std::vector<FeedbackItem>& arrivals) {
    for (const auto& item : arrivals) {
      if (!std::holds_alternative<FullLoss>(item.payload)) throw InvalidInput("FTDL-RSC needs full-loss feedback");
      history_.add(loss_of(item));
    }
    const double strong_mod = *cfg_.gamma * cfg_.geometry.sigma() * static_cast<double>(feedback_count_);
    advance(t, 0, solve(t, 0, history_, strong_mod, budget(t, arrivals.size())));
  }

  void step_dmd_gc(int t, const std::vector<FeedbackItem>& arrivals) {
    const double eta = *cfg_.eta;
    const double rho = budget(t, arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      // gradient re-evaluated at the current inner iterate x_{t,i}
      const Vector g = loss_of(arrivals[i]).gradient(x_);
      mirror_update(t, static_cast<int>(i), g, eta, rho);
    }
  }

  void step_sdmd_gc(int t, const std::vector<FeedbackItem>& arrivals) {
    const double eta = *cfg_.eta;
    const double rho = budget(t, arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) mirror_update(t, static_cast<int>(i), value_of(arrivals[i]), eta, rho);
  }

  void step_dmd_rsc(int t, const std::vector<FeedbackItem>& arrivals) {
    Vector g(cfg_.geometry.dim(), 0.0);
    for (const auto& item : arrivals) vec::axpy(1.0, loss_of(item).gradient(x_), g);
    mirror_update(t, 0, g, rate(t), budget(t, arrivals.size()));
  }

  void step_sdmd_rsc(int t, const std::vector<FeedbackItem>& arrivals) {
    Vector g(cfg_.geometry.dim(), 0.0);
    for (const auto& item : arrivals) vec::axpy(1.0, value_of(item), g);
    mirror_update(t, 0, g, rate(t), budget(t, arrivals.size()));
  }

  void step_dogd(int t, const std::vector<FeedbackItem>& arrivals, double eta) {
    Vector v = x_;
    for (const auto& item : arrivals) vec::axpy(-eta, value_of(item), v);
    ++solve_count_;
    advance(t, 0, cfg_.geometry.euclidean_projection(v));
  }

  // x_{t} <- repair(x_t + rho_t 1) for freshly computed decisions.
  void inject_noise(int next_round) {
    if (cfg_.rho.kind != RhoSchedule::Kind::NoiseInjection) return;
    const double r = cfg_.rho.C / std::pow(static_cast<double>(next_round), cfg_.rho.exponent);
    if (r == 0.0) return;
    DecisionVector z = x_;
    for (double& v : z) v += r;
    x_ = cfg_.geometry.repair(z);
  }

  LearnerConfig cfg_;
  LearnerHooks hooks_;
  LossSum history_;
  DecisionVector x_;
  int round_ = 1;
  long long feedback_count_ = 0;
  long long solve_count_ = 0;
};

}  // namespace delayoco
