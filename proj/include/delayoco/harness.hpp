#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "delayoco/oracle.hpp"

namespace delayoco {

enum class Task { Classification, Regression };

inline std::string to_string(Task t) { return t == Task::Classification ? "classification" : "regression"; }

inline Task parse_task(std::string_view s) {
  if (s == "classification") return Task::Classification;
  if (s == "regression") return Task::Regression;
  throw ConfigError("unknown task '" + std::string(s) + "' (classification|regression)");
}

inline SetKind parse_geometry_kind(std::string_view s) {
  if (s == "euclidean") return SetKind::EuclideanBall;
  if (s == "simplex") return SetKind::ProbabilitySimplex;
  if (s == "pnorm") return SetKind::PNormBall;
  throw ConfigError("unknown geometry '" + std::string(s) + "' (euclidean|simplex|pnorm)");
}

inline RhoSchedule::Kind parse_approx_mode(std::string_view s) {
  if (s == "theorem") return RhoSchedule::Kind::TheoremDefault;
  if (s == "noise") return RhoSchedule::Kind::NoiseInjection;
  if (s == "exact") return RhoSchedule::Kind::Exact;
  throw ConfigError("unknown approx mode '" + std::string(s) + "' (theorem|noise|exact)");
}

struct GeometrySpec {
  SetKind kind = SetKind::ProbabilitySimplex;
  double p = 1.5;
  std::optional<double> radius;  // default: norm of the planted vector
};

struct ExperimentConfig {
  Task task = Task::Classification;
  int n = 10;
  int T = 2000;
  GeometrySpec geometry;
  std::vector<Algorithm> algos = {Algorithm::FtdrlGc, Algorithm::DmdGc, Algorithm::SdmdGc, Algorithm::Dogd};
  DelayMode delay = DelayMode::uniform(10);
  RhoSchedule::Kind approx_mode = RhoSchedule::Kind::NoiseInjection;
  double C = 1.0;
  double gamma = 0.1;
  std::optional<bool> regularize;  // regression only; default: on iff an RSC algorithm is selected
  std::optional<double> eta;       // overrides the corollary rate of the GC variants
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string out;
  std::string data_path;  // pre-featurized CSV (label, features...) instead of synthetic data
  int threads = 1;
  int max_inner_iters = 10'000;

  void validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (T < 1) throw ConfigError("T must be >= 1");
    if (delay.value < 1) throw ConfigError("d must be >= 1");
    if (!(C >= 0.0)) throw ConfigError("C must be >= 0");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (algos.empty()) throw ConfigError("at least one algorithm is required");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (geometry.kind == SetKind::PNormBall && !(geometry.p > 1.0 && geometry.p <= 2.0))
      throw ConfigError("p must lie in (1, 2]");
    if (geometry.radius && !(*geometry.radius > 0.0)) throw ConfigError("radius must be positive");
    if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }

  bool regularized() const {
    if (task != Task::Regression) return false;
    if (regularize) return *regularize;
    return std::any_of(algos.begin(), algos.end(), is_relative_strongly_convex);
  }

  double noise_exponent() const { return task == Task::Classification ? 1.5 : 3.0; }
};

/// [x*]_i = 1 for i <= floor(n/2), else 0.
inline DecisionVector planted_vector(int n) {
  DecisionVector x(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n / 2; ++i) x[static_cast<std::size_t>(i)] = 1.0;
  return x;
}

inline Geometry make_geometry(const ExperimentConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.n);
  const double k = std::max(1.0, std::floor(cfg.n / 2.0));
  switch (cfg.geometry.kind) {
    case SetKind::EuclideanBall: return Geometry::euclidean(n, cfg.geometry.radius.value_or(std::sqrt(k)));
    case SetKind::ProbabilitySimplex: return Geometry::simplex(n);
    case SetKind::PNormBall:
      return Geometry::pnorm(n, cfg.geometry.radius.value_or(std::pow(k, 1.0 / cfg.geometry.p)), cfg.geometry.p);
  }
  throw ConfigError("unknown geometry");
}

/// y = +1 iff 1 / (1 + exp(-<x*, b> + omega)) >= 0.5.
inline double classification_label(double margin, double omega) {
  return LossFunction::sigmoid(margin - omega) >= 0.5 ? 1.0 : -1.0;
}

namespace detail {
inline Vector draw_feature(CounterRng& rng, int n) {
  Vector b(static_cast<std::size_t>(n));
  for (double& v : b) v = rng.uniform(-1.0, 1.0);
  return b;
}
}  // namespace detail

/// T logistic losses with features uniform on (-1, 1)^n and labels from the
/// planted vector under N(0, 1) noise. Deterministic in the seed.
inline std::vector<LossFunction> gen_classification(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  CounterRng features(seed, streams::kFeatures);
  CounterRng noise(seed, streams::kNoise);
  const DecisionVector x_star = planted_vector(cfg.n);
  std::vector<LossFunction> out;
  out.reserve(static_cast<std::size_t>(cfg.T));
  for (int t = 1; t <= cfg.T; ++t) {
    Vector b = detail::draw_feature(features, cfg.n);
    const double y = classification_label(vec::dot(x_star, b), noise.normal());
    out.push_back(LossFunction::logistic(y, std::move(b), t));
  }
  return out;
}

/// T squared (or regularized squared) losses with y = <b, x*> + omega.
inline std::vector<LossFunction> gen_regression(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  CounterRng features(seed, streams::kFeatures);
  CounterRng noise(seed, streams::kNoise);
  const DecisionVector x_star = planted_vector(cfg.n);
  const Geometry geo = make_geometry(cfg);
  const bool reg = cfg.regularized();
  std::vector<LossFunction> out;
  out.reserve(static_cast<std::size_t>(cfg.T));
  for (int t = 1; t <= cfg.T; ++t) {
    Vector b = detail::draw_feature(features, cfg.n);
    const double y = vec::dot(b, x_star) + noise.normal();
    out.push_back(reg ? LossFunction::regularized_squared(y, std::move(b), cfg.gamma, geo, t)
                      : LossFunction::squared(y, std::move(b), t));
  }
  return out;
}

/// Loader for pre-featurized data: one row per round, "label,f1,...,fn".
/// Classification labels may be +-1 or 0/1. At most cfg.T rows are used.
inline std::vector<LossFunction> load_featurized_csv(const ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  const Geometry geo = make_geometry(cfg);
  const bool reg = cfg.regularized();
  std::vector<LossFunction> out;
  std::string line;
  while (static_cast<int>(out.size()) < cfg.T && std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        row.clear();
        break;
      }
    }
    if (row.empty() && out.empty()) continue;  // header
    if (row.size() != static_cast<std::size_t>(cfg.n) + 1)
      throw IoError(path + ": expected " + std::to_string(cfg.n + 1) + " columns in '" + line + "'");
    const int t = static_cast<int>(out.size()) + 1;
    Vector b(row.begin() + 1, row.end());
    if (cfg.task == Task::Classification) {
      const double y = row[0] > 0.0 ? 1.0 : -1.0;
      out.push_back(LossFunction::logistic(y, std::move(b), t));
    } else {
      out.push_back(reg ? LossFunction::regularized_squared(row[0], std::move(b), cfg.gamma, geo, t)
                        : LossFunction::squared(row[0], std::move(b), t));
    }
  }
  if (out.empty()) throw IoError(path + ": no data rows");
  return out;
}

/// Output of driving one learner through one delayed stream.
struct RunOutput {
  std::vector<DecisionVector> decisions;  // x_1 .. x_T
  DecisionVector final_decision;          // x_{T+1}
  int tail_dropped = 0;
  long long solve_count = 0;
  long long feedback_count = 0;
};

/// Round loop: play x_t, query feedback on f_t, route it through the delay
/// buffer, hand F_t to the learner.
inline RunOutput drive(const LearnerConfig& cfg, const std::vector<LossFunction>& losses,
                       const DelaySchedule& schedule, LearnerHooks hooks = {}) {
  const int T = static_cast<int>(losses.size());
  if (schedule.horizon() != T) throw DimensionMismatch("schedule horizon differs from the number of losses");
  Learner learner(cfg, std::move(hooks));
  FeedbackBuffer<FeedbackItem> buffer(T);
  RunOutput out;
  out.decisions.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    out.decisions.push_back(learner.decision());
    FeedbackItem item = learner.query(losses[static_cast<std::size_t>(t - 1)]);
    learner.step(buffer.route(t, schedule.delay(t), std::move(item)));
  }
  out.final_decision = learner.decision();
  out.tail_dropped = buffer.tail_dropped();
  out.solve_count = learner.solve_count();
  out.feedback_count = learner.feedback_count();
  return out;
}

/// Euclidean analogues of R and G for the DOGD baselines.
inline double euclidean_radius(const Geometry& geo) {
  switch (geo.kind()) {
    case SetKind::EuclideanBall: return geo.radius();
    case SetKind::ProbabilitySimplex: return 1.0;
    case SetKind::PNormBall: return geo.radius();  // |x|_2 <= |x|_p for p <= 2
  }
  return geo.radius();
}

inline double euclidean_grad_bound(const LossFunction& f, const Geometry& geo) {
  const double b2 = vec::norm2(f.feature());
  const double R2 = euclidean_radius(geo);
  double g = f.kind() == LossKind::Logistic ? b2 : (std::abs(f.target()) + R2 * b2) * b2;
  if (f.kind() == LossKind::RegularizedSquared) {
    const double n = static_cast<double>(geo.dim());
    double psi_sup = R2;
    if (geo.kind() == SetKind::ProbabilitySimplex) psi_sup = std::sqrt(n) * (1.0 + std::abs(std::log(kSimplexFloor)));
    if (geo.kind() == SetKind::PNormBall) psi_sup = std::sqrt(n) * geo.radius();
    g += f.gamma() * psi_sup;
  }
  return g;
}

/// Everything one seed shares across algorithms.
struct SeedData {
  std::uint64_t seed = 0;
  DelaySchedule schedule;
  std::vector<LossFunction> losses;
  ComparatorSolution comparator;
};

inline SeedData prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedData s;
  s.seed = seed;
  if (!cfg.data_path.empty()) s.losses = load_featurized_csv(cfg, cfg.data_path);
  else s.losses = cfg.task == Task::Classification ? gen_classification(cfg, seed) : gen_regression(cfg, seed);
  s.schedule = generate_schedule(cfg.delay, static_cast<int>(s.losses.size()), seed);
  s.comparator = solve_comparator(s.losses, make_geometry(cfg));
  return s;
}

/// Learner settings for one algorithm: corollary rate (or the override) for
/// the fixed-rate variants, gamma for the RSC variants, rho from the approx mode.
inline LearnerConfig learner_config(const ExperimentConfig& cfg, Algorithm algo, const SeedData& data) {
  const Geometry geo = make_geometry(cfg);
  const bool baseline = algo == Algorithm::Dogd || algo == Algorithm::DogdSc;
  double g = 0.0;
  for (const auto& f : data.losses)
    g = std::max(g, baseline ? euclidean_grad_bound(f, geo) : grad_bound(f, geo).g_star);
  LearnerConfig lc;
  lc.algo = algo;
  lc.geometry = geo;
  lc.g_star = g;
  lc.solver.max_inner_iters = cfg.max_inner_iters;
  if (is_relative_strongly_convex(algo)) {
    lc.gamma = cfg.gamma;
  } else {
    const CorollaryInputs in{static_cast<long long>(data.losses.size()), data.schedule.total_delay(),
                             baseline ? euclidean_radius(geo) : geo.radius(), g};
    lc.eta = cfg.eta ? *cfg.eta : eta_for_corollary(geo, algo, in);
  }
  switch (cfg.approx_mode) {
    case RhoSchedule::Kind::TheoremDefault: lc.rho = RhoSchedule::theorem(); break;
    case RhoSchedule::Kind::Exact: lc.rho = RhoSchedule::exact(); break;
    case RhoSchedule::Kind::NoiseInjection: lc.rho = RhoSchedule::noise(cfg.C, cfg.noise_exponent()); break;
  }
  return lc;
}

/// G_psi / G: largest secant ratio |grad psi(x') - grad psi(x)|_* / |x' - x|
/// along the trajectory, over the measured gradient bound. Exactly 1 / G on
/// the Euclidean ball.
inline double measure_xi(const Geometry& geo, const std::vector<DecisionVector>& xs, double g_measured) {
  if (!(g_measured > 0.0)) return 0.0;
  double g_psi = geo.kind() == SetKind::EuclideanBall ? 1.0 : 0.0;
  if (geo.kind() != SetKind::EuclideanBall) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double dx = geo.norm(vec::sub(xs[i], xs[i - 1]));
      if (dx < 1e-12) continue;
      const double dg = geo.dual_norm(vec::sub(geo.psi_grad(xs[i]), geo.psi_grad(xs[i - 1])));
      g_psi = std::max(g_psi, dg / dx);
    }
    if (g_psi == 0.0) g_psi = 1.0;
  }
  return g_psi / g_measured;
}

/// Runs one algorithm on one prepared seed and attaches the regret trace and
/// its metadata.
inline RegretTrace run_single(const ExperimentConfig& cfg, Algorithm algo, const SeedData& data,
                              LearnerHooks hooks = {}) {
  const LearnerConfig lc = learner_config(cfg, algo, data);
  RunOutput run;
  try {
    run = drive(lc, data.losses, data.schedule, std::move(hooks));
  } catch (const CertificateNotReached& e) {
    throw CertificateNotReached(to_string(algo) + " seed " + std::to_string(data.seed) + ": " + e.what(), e.gap(),
                                e.rho());
  }
  const Geometry& geo = lc.geometry;
  const bool baseline = algo == Algorithm::Dogd || algo == Algorithm::DogdSc;
  const auto dual = [&](const Vector& g) { return baseline ? vec::norm2(g) : geo.dual_norm(g); };

  RegretTrace tr = regret_curve(run.decisions, data.losses, data.comparator.x_star);
  tr.algo = to_string(algo);
  tr.seed = data.seed;
  tr.d = cfg.delay.value;
  tr.C = cfg.C;
  tr.geometry = geo.name();
  tr.task = to_string(cfg.task);

  double g_meas = 0.0;
  for (std::size_t t = 0; t < data.losses.size(); ++t) {
    g_meas = std::max(g_meas, dual(data.losses[t].gradient(run.decisions[t])));
    g_meas = std::max(g_meas, dual(data.losses[t].gradient(data.comparator.x_star)));
  }
  std::vector<DecisionVector> path = run.decisions;
  path.push_back(run.final_decision);

  TraceMetadata& m = tr.meta;
  m.tail_dropped = run.tail_dropped;
  m.total_delay = data.schedule.total_delay();
  m.max_delay = data.schedule.max_delay();
  m.eta = lc.eta.value_or(0.0);
  m.measured_g = g_meas;
  m.analytic_g = lc.g_star;
  m.xi = measure_xi(geo, path, g_meas);
  m.solve_count = run.solve_count;
  m.feedback_count = run.feedback_count;

  TheoremConstants c;
  c.eta = m.eta > 0.0 ? m.eta : c.eta;
  c.sigma = baseline ? 1.0 : geo.sigma();
  c.gamma = lc.gamma.value_or(c.gamma);
  c.xi = m.xi;
  c.radius = baseline ? euclidean_radius(geo) : geo.radius();
  c.T = static_cast<long long>(data.losses.size());
  c.total_delay = m.total_delay;
  c.max_delay = m.max_delay;
  const DecisionVector x1 = geo.initial_point();
  c.psi_star = geo.psi(data.comparator.x_star);
  c.psi_init = geo.psi(x1);
  c.bregman_star = geo.bregman(data.comparator.x_star, x1);
  c.g_star = g_meas;
  m.theorem_bound = theorem_bound(algo, c).bound_value;
  c.g_star = m.analytic_g;
  c.xi = m.analytic_g > 0.0 ? m.xi * g_meas / m.analytic_g : m.xi;
  m.theorem_bound_analytic = theorem_bound(algo, c).bound_value;
  return tr;
}

namespace detail {
/// Runs fn(0..count-1) on up to `threads` workers; rethrows the first error.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}
}  // namespace detail

/// All (algo, seed) runs of the config, sorted by algorithm then seed. All
/// algorithms of one seed share the data, the schedule and the comparator.
inline std::vector<RegretTrace> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SeedData> seeds(cfg.seeds.size());
  detail::parallel_for(seeds.size(), cfg.threads, [&](std::size_t i) { seeds[i] = prepare_seed(cfg, cfg.seeds[i]); });

  std::vector<RegretTrace> traces(cfg.algos.size() * seeds.size());
  detail::parallel_for(traces.size(), cfg.threads, [&](std::size_t j) {
    traces[j] = run_single(cfg, cfg.algos[j / seeds.size()], seeds[j % seeds.size()]);
  });
  std::stable_sort(traces.begin(), traces.end(), [](const RegretTrace& a, const RegretTrace& b) {
    return a.algo != b.algo ? a.algo < b.algo : a.seed < b.seed;
  });
  return traces;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr const char* kCsvHeader = "algo,seed,t,cum_regret,avg_regret,d,C,geometry,task";

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_csv(const std::vector<RegretTrace>& traces, const std::string& path) {
  if (traces.empty()) throw InvalidInput("no traces to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kCsvHeader << '\n';
  for (const auto& tr : traces) {
    const std::string tail =
        "," + std::to_string(tr.d) + "," + format_real(tr.C) + "," + tr.geometry + "," + tr.task + "\n";
    for (int t = 1; t <= tr.horizon(); ++t) {
      const auto i = static_cast<std::size_t>(t - 1);
      out << tr.algo << ',' << tr.seed << ',' << t << ',' << format_real(tr.cumulative[i]) << ','
          << format_real(tr.average[i]) << tail;
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Parses a CSV written by write_csv back into traces (metadata not included).
inline std::vector<RegretTrace> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError(path + ": unexpected header");
  std::vector<RegretTrace> traces;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw IoError(path + ": malformed row '" + line + "'");
    try {
      const std::uint64_t seed = std::stoull(cells[1]);
      const int t = std::stoi(cells[2]);
      if (traces.empty() || t == 1 || traces.back().algo != cells[0] || traces.back().seed != seed) {
        RegretTrace tr;
        tr.algo = cells[0];
        tr.seed = seed;
        tr.d = std::stoi(cells[5]);
        tr.C = std::stod(cells[6]);
        tr.geometry = cells[7];
        tr.task = cells[8];
        traces.push_back(std::move(tr));
      }
      RegretTrace& tr = traces.back();
      if (t != tr.horizon() + 1) throw IoError(path + ": rounds out of order at '" + line + "'");
      tr.cumulative.push_back(std::stod(cells[3]));
      tr.average.push_back(std::stod(cells[4]));
    } catch (const std::logic_error&) {
      throw IoError(path + ": malformed row '" + line + "'");
    }
  }
  return traces;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

/// Median across traces of the per-round time-averaged regret, per algorithm.
inline std::map<std::string, std::vector<double>> median_curves(const std::vector<RegretTrace>& traces) {
  std::map<std::string, std::vector<const RegretTrace*>> by_algo;
  for (const auto& tr : traces) by_algo[tr.algo].push_back(&tr);
  std::map<std::string, std::vector<double>> out;
  for (const auto& [algo, group] : by_algo) {
    int len = group.front()->horizon();
    for (const auto* tr : group) len = std::min(len, tr->horizon());
    std::vector<double>& curve = out[algo];
    for (int t = 0; t < len; ++t) {
      std::vector<double> vals;
      for (const auto* tr : group) vals.push_back(tr->average[static_cast<std::size_t>(t)]);
      curve.push_back(median(std::move(vals)));
    }
  }
  return out;
}

/// Self-contained SVG line chart: median time-averaged regret vs round, one
/// polyline per algorithm.
inline void render_report(const std::vector<RegretTrace>& traces, const std::string& path) {
  if (traces.empty()) throw InvalidInput("no traces to render");
  const auto curves = median_curves(traces);
  constexpr double W = 800, H = 500, left = 70, right = 170, top = 30, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t T = 1;
  for (const auto& [algo, c] : curves) {
    T = std::max(T, c.size());
    for (double v : c) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const auto px = [&](std::size_t t) { return left + pw * (T > 1 ? static_cast<double>(t) / (T - 1) : 0.0); };
  const auto py = [&](double v) { return top + ph * (hi - v) / (hi - lo); };
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  char buf[160];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", W, H,
                W, H);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                left, top, pw, ph);
  svg += buf;
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.4g</text>\n",
                  left - 6, py(v) + 4, v);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\">1</text>\n", left, H - bottom + 16);
  svg += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%zu</text>\n",
                left + pw, H - bottom + 16, T);
  svg += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">round t</text>\n",
                left + pw / 2, H - 12);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 %g)\">"
                "median regret(t)/t</text>\n",
                top + ph / 2, top + ph / 2);
  svg += buf;

  std::size_t idx = 0;
  for (const auto& [algo, c] : curves) {
    const char* color = palette[idx % 8];
    const std::size_t stride = std::max<std::size_t>(1, c.size() / 1000);
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < c.size(); t += stride) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(t), py(c[t]));
      svg += buf;
    }
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(c.size() - 1), py(c.back()));
    svg += buf;
    svg += "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(idx);
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                  W - right + 12, ly, W - right + 36, ly, color);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\">", W - right + 42, ly + 4);
    svg += buf;
    svg += algo;
    svg += "</text>\n";
    ++idx;
  }
  svg += "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << svg;
  if (!out) throw IoError("write failed: " + path);
}

/// Per-trace metadata as a JSON array, written next to the CSV.
inline void write_metadata_json(const std::vector<RegretTrace>& traces, const std::string& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& tr : traces) {
    const TraceMetadata& m = tr.meta;
    arr.push_back({{"algo", tr.algo},
                   {"seed", tr.seed},
                   {"d", tr.d},
                   {"C", tr.C},
                   {"geometry", tr.geometry},
                   {"task", tr.task},
                   {"T", tr.horizon()},
                   {"final_regret", tr.final_regret()},
                   {"final_avg_regret", tr.final_average()},
                   {"tail_dropped", m.tail_dropped},
                   {"total_delay", m.total_delay},
                   {"max_delay", m.max_delay},
                   {"eta", m.eta},
                   {"measured_g", m.measured_g},
                   {"analytic_g", m.analytic_g},
                   {"xi", m.xi},
                   {"theorem_bound", m.theorem_bound},
                   {"theorem_bound_analytic", m.theorem_bound_analytic},
                   {"solve_count", m.solve_count},
                   {"feedback_count", m.feedback_count}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << arr.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace delayoco
