#include <CLI11.hpp>

#include <iostream>

#include "delayoco/delayoco.hpp"

using namespace delayoco;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Algorithm> parse_algos(const std::string& s) {
  if (s == "all") return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
  if (s == "gc") return {Algorithm::FtdrlGc, Algorithm::DmdGc, Algorithm::SdmdGc, Algorithm::Dogd};
  if (s == "rsc") return {Algorithm::FtdlRsc, Algorithm::DmdRsc, Algorithm::SdmdRsc, Algorithm::DogdSc};
  std::vector<Algorithm> out;
  for (const auto& name : split(s, ',')) out.push_back(parse_algorithm(name));
  return out;
}

// "1,2,5" or "1-10"
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  try {
    for (const auto& part : split(s, ',')) {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
        continue;
      }
      const std::uint64_t lo = std::stoull(part.substr(0, dash)), hi = std::stoull(part.substr(dash + 1));
      if (hi < lo) throw ConfigError("empty seed range " + part);
      for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("malformed seed list '" + s + "'");
  }
  return out;
}

std::string sidecar_path(const std::string& csv) {
  const auto dot = csv.rfind('.');
  const auto slash = csv.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv.substr(0, dot) : csv) + ".meta.json";
}

void print_summary(const std::vector<RegretTrace>& traces) {
  std::map<std::string, std::vector<const RegretTrace*>> by_algo;
  for (const auto& tr : traces) by_algo[tr.algo].push_back(&tr);
  std::printf("%-10s %6s %16s %16s %16s\n", "algo", "seeds", "median Reg_T/T", "median Reg_T", "median bound");
  for (const auto& [algo, group] : by_algo) {
    std::vector<double> avg, reg, bound;
    for (const auto* tr : group) {
      avg.push_back(tr->final_average());
      reg.push_back(tr->final_regret());
      bound.push_back(tr->meta.theorem_bound);
    }
    std::printf("%-10s %6zu %16.6g %16.6g %16.6g\n", algo.c_str(), group.size(), median(avg), median(reg),
                median(bound));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online convex optimization with unknown delays: experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and write per-round regret CSV");
  run->set_config("--config", "", "key = value config file; flags override it");
  std::string algos = "gc", geometry = "simplex", task = "classification", delay_mode = "uniform",
              approx = "noise", seeds = "1-10", out = "regret.csv", data;
  double p = 1.5, C = 1.0, gamma = 0.1, eta = 0.0, radius = 0.0;
  int T = 2000, n = 10, d = 10, threads = 1;
  std::string regularize = "auto";
  run->add_option("--algo", algos, "comma list of algorithms, or gc | rsc | all")->capture_default_str();
  run->add_option("--geometry", geometry, "euclidean | simplex | pnorm")->capture_default_str();
  run->add_option("--p", p, "p of the p-norm geometry, in (1, 2]")->capture_default_str();
  run->add_option("--radius", radius, "ball radius (default: norm of the planted vector)");
  run->add_option("--task", task, "classification | regression")->capture_default_str();
  run->add_option("--T", T, "horizon")->capture_default_str();
  run->add_option("--n", n, "dimension")->capture_default_str();
  run->add_option("--delay-mode", delay_mode, "fixed | uniform")->capture_default_str();
  run->add_option("--d", d, "fixed delay, or maximum delay of the uniform mode")->capture_default_str();
  run->add_option("--C", C, "noise / error scale")->capture_default_str();
  run->add_option("--approx-mode", approx, "theorem | noise | exact")->capture_default_str();
  run->add_option("--gamma", gamma, "relative strong convexity modulus")->capture_default_str();
  run->add_option("--eta", eta, "override the corollary learning rate");
  run->add_option("--regularize", regularize, "auto | true | false (regression losses)")->capture_default_str();
  run->add_option("--seeds", seeds, "comma list or range, e.g. 1-10")->capture_default_str();
  run->add_option("--data", data, "pre-featurized CSV: label,features...");
  run->add_option("--threads", threads, "worker threads")->capture_default_str();
  run->add_option("--out", out, "output CSV path")->capture_default_str();

  auto* report = app.add_subcommand("report", "render an SVG chart from a regret CSV");
  std::string report_in, report_out = "report.svg";
  report->add_option("--in", report_in, "regret CSV")->required();
  report->add_option("--out", report_out, "output SVG path")->capture_default_str();

  auto* schedule = app.add_subcommand("schedule", "write a uniform random delay schedule as CSV");
  int sched_d = 10, sched_T = 2000;
  std::uint64_t sched_seed = 1;
  std::string sched_out = "schedule.csv";
  schedule->add_option("--d", sched_d, "maximum delay")->capture_default_str();
  schedule->add_option("--T", sched_T, "horizon")->capture_default_str();
  schedule->add_option("--seed", sched_seed, "seed")->capture_default_str();
  schedule->add_option("--out", sched_out, "output CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      ExperimentConfig cfg;
      cfg.algos = parse_algos(algos);
      cfg.geometry.kind = parse_geometry_kind(geometry);
      cfg.geometry.p = p;
      if (radius > 0.0) cfg.geometry.radius = radius;
      cfg.task = parse_task(task);
      cfg.T = T;
      cfg.n = n;
      if (delay_mode == "fixed") cfg.delay = DelayMode::fixed(d);
      else if (delay_mode == "uniform") cfg.delay = DelayMode::uniform(d);
      else throw ConfigError("unknown delay mode '" + delay_mode + "' (fixed|uniform)");
      cfg.C = C;
      cfg.approx_mode = parse_approx_mode(approx);
      cfg.gamma = gamma;
      if (eta > 0.0) cfg.eta = eta;
      if (regularize == "true") cfg.regularize = true;
      else if (regularize == "false") cfg.regularize = false;
      else if (regularize != "auto") throw ConfigError("regularize must be auto, true or false");
      cfg.seeds = parse_seeds(seeds);
      cfg.data_path = data;
      cfg.threads = threads;
      cfg.out = out;
      cfg.validate();

      const auto traces = run_experiment(cfg);
      write_csv(traces, cfg.out);
      write_metadata_json(traces, sidecar_path(cfg.out));
      print_summary(traces);
      std::cout << "wrote " << cfg.out << " and " << sidecar_path(cfg.out) << "\n";
    } else if (*report) {
      render_report(read_csv(report_in), report_out);
      std::cout << "wrote " << report_out << "\n";
    } else if (*schedule) {
      const DelaySchedule s = generate_schedule(DelayMode::uniform(sched_d), sched_T, sched_seed);
      write_schedule_csv(s, sched_out);
      std::cout << "wrote " << sched_out << " (D_T = " << s.total_delay() << ", d = " << s.max_delay() << ")\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CertificateNotReached& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
