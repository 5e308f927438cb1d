#include "sdjls/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "sdjls/analysis.hpp"
#include "sdjls/estimators.hpp"
#include "sdjls/io.hpp"
#include "sdjls/kernels.hpp"
#include "sdjls/model.hpp"
#include "sdjls/simulate.hpp"
#include "sdjls/synthesis.hpp"

namespace sdjls::cli {

namespace {

using io::Json;
namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string model_path;
  std::string report_path;
  std::optional<double> eps;
  int max_iters = 20000;
  double tol_check = 1e-7;
  std::string gains_out;
  std::string gains_in;
  double t_final = 10.0;
  int paths = 0;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  double sample_dt = -1.0;
  double h_scan = 1e-3;
  int threads = 0;
};

struct Outcome {
  int code = kOk;
  Json body = Json::object();
};

Json options_json(const Options& o) {
  Json j;
  j["model"] = o.model_path;
  if (o.command == "analyze" || o.command == "synthesize") {
    j["eps"] = o.eps ? Json(*o.eps) : Json(nullptr);
    j["max_iters"] = o.max_iters;
    j["tol_check"] = o.tol_check;
  }
  if (o.command == "synthesize") j["out"] = o.gains_out;
  if (o.command == "simulate" || o.command == "energy") {
    j["t_final"] = o.t_final;
    j["paths"] = o.paths;
    j["gains"] = o.gains_in;
    j["h_scan"] = o.h_scan;
    j["threads"] = o.threads;
  }
  if (o.command == "simulate") {
    j["out_dir"] = o.out_dir;
    j["sample_dt"] = o.sample_dt;
  }
  if (!o.report_path.empty()) j["report"] = o.report_path;
  return j;
}

SolveOptions solver_options(const Options& o) {
  SolveOptions s;
  s.max_iters = o.max_iters;
  s.tol_check = o.tol_check;
  s.seed = o.seed.value_or(0);
  return s;
}

std::vector<Matrix> load_gains(const Options& o) {
  if (o.gains_in.empty()) return {};
  return io::gains_K_from_json(io::read_json_file(o.gains_in));
}

Outcome cmd_validate(const Options& o, std::ostream& err) {
  Outcome r;
  const ModelDescription desc = io::load_model(o.model_path);
  const auto violations = find_violations(desc);
  Json list = Json::array();
  for (const auto& v : violations) {
    err << to_string(v.kind) << ": " << v.message << '\n';
    Json item{{"kind", to_string(v.kind)}, {"field", v.field}, {"message", v.message}};
    if (v.row >= 0) item["row"] = v.row;
    if (v.col >= 0) item["col"] = v.col;
    item["value"] = io::number_or_null(v.value);
    list.push_back(std::move(item));
  }
  r.body["valid"] = violations.empty();
  r.body["violations"] = std::move(list);
  r.code = violations.empty() ? kOk : kInvalid;
  return r;
}

Outcome cmd_analyze(const Options& o, std::ostream& err) {
  Outcome r;
  const SdjlsModel model = validate_model(io::load_model(o.model_path));
  CertifyOptions opts;
  opts.epsilon = o.eps;
  opts.solver = solver_options(o);
  const CertifyResult res = certify_stability(model, opts);
  if (res.certificate) {
    r.body = io::certificate_to_json(*res.certificate, res.verdict);
  } else {
    r.body["verdict"] = to_string(res.verdict);
    r.body["epsilon"] = res.epsilon;
  }
  r.body["iterations"] = res.iterations;
  r.body["infeasibility"] = res.infeasibility;
  err << "verdict: " << to_string(res.verdict) << " after " << res.iterations << " iterations\n";
  r.code = res.verdict == Verdict::Feasible ? kOk : kUndetermined;
  return r;
}

Outcome cmd_synthesize(const Options& o, std::ostream& err) {
  Outcome r;
  const SdjlsModel model = validate_model(io::load_model(o.model_path));
  if (model.input_dim() == 0) throw NoInputError("NoInput: model has input_dim = 0; nothing to synthesize");
  SynthesisOptions opts;
  opts.epsilon = o.eps;
  opts.solver = solver_options(o);
  opts.certify.solver.max_iters = o.max_iters;
  opts.certify.solver.tol_check = o.tol_check;
  const SynthesisResult res = synthesize(model, opts);
  r.body["verdict"] = to_string(res.verdict);
  r.body["epsilon"] = res.epsilon;
  r.body["iterations"] = res.iterations;
  r.body["infeasibility"] = res.infeasibility;
  if (res.gains) {
    const Json gains = io::gains_to_json(*res.gains);
    r.body["gains"] = gains;
    if (!o.gains_out.empty()) {
      io::write_json_file(o.gains_out, gains);
      r.body["gains_file"] = o.gains_out;
    }
    if (!res.gains->verified) err << "warning: closed loop could not be certified\n";
  }
  err << "verdict: " << to_string(res.verdict) << " after " << res.iterations << " iterations\n";
  r.code = res.verdict == Verdict::Feasible ? kOk : kUndetermined;
  return r;
}

Outcome cmd_simulate(const Options& o, std::ostream& err) {
  Outcome r;
  const SdjlsModel model = validate_model(io::load_model(o.model_path));
  const std::vector<Matrix> gains = load_gains(o);
  SimOptions sim;
  sim.exit.h_scan = o.h_scan;
  sim.sample_dt = o.sample_dt;
  const FlowSet flows(model, gains, o.h_scan);
  const std::uint64_t seed = *o.seed;
  fs::create_directories(o.out_dir);

  struct PathInfo {
    std::string trajectory;
    std::string events;
    std::size_t jumps = 0;
    std::size_t crossings = 0;
    bool diverged = false;
  };
  const auto infos = run_indexed(o.paths, o.threads, [&](int p) {
    const Trajectory traj = simulate_path(flows, o.t_final, derive_seed(seed, p), sim);
    std::ostringstream name;
    name << "path_" << std::setw(4) << std::setfill('0') << p;
    PathInfo info;
    info.trajectory = (fs::path(o.out_dir) / (name.str() + ".csv")).string();
    info.events = (fs::path(o.out_dir) / (name.str() + "_events.csv")).string();
    std::ofstream tcsv(info.trajectory);
    std::ofstream ecsv(info.events);
    if (!tcsv || !ecsv) throw IoError("cannot write into " + o.out_dir);
    io::write_trajectory_csv(tcsv, traj, model.state_dim());
    io::write_events_csv(ecsv, traj);
    for (const auto& e : traj.events) (e.kind == EventKind::ModeJump ? info.jumps : info.crossings)++;
    info.diverged = traj.diverged;
    return info;
  });
  Json files = Json::array();
  int divergent = 0;
  for (const auto& info : infos) {
    files.push_back({{"trajectory", info.trajectory},
                     {"events", info.events},
                     {"mode_jumps", info.jumps},
                     {"region_crossings", info.crossings},
                     {"diverged", info.diverged}});
    divergent += info.diverged ? 1 : 0;
  }
  r.body["paths"] = std::move(files);
  r.body["divergent_paths"] = divergent;
  err << "wrote " << o.paths << " path(s) to " << o.out_dir << '\n';
  return r;
}

Outcome cmd_energy(const Options& o, std::ostream& err) {
  Outcome r;
  const SdjlsModel model = validate_model(io::load_model(o.model_path));
  const std::vector<Matrix> gains = load_gains(o);
  MonteCarloOptions mc;
  mc.threads = o.threads;
  mc.sim.exit.h_scan = o.h_scan;
  const EnergyEstimate est = estimate_energy(model, gains, o.t_final, o.paths, *o.seed, mc);
  r.body["mean"] = io::number_or_null(est.mean);
  r.body["std_error"] = io::number_or_null(est.std_error);
  r.body["mean_convergent"] = io::number_or_null(est.mean_convergent);
  r.body["n_paths"] = est.n_paths;
  r.body["divergent_paths"] = est.divergent_paths;
  err << "mean " << est.mean << " std_error " << est.std_error << " divergent " << est.divergent_paths << '\n';
  return r;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Options o;

  CLI::App app{"State-dependent jump linear systems: validation, stability certificates, "
               "feedback synthesis and Monte Carlo simulation",
               "sdjls"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("model", o.model_path, "Model JSON file")->required();
    sub->add_option("--report", o.report_path, "Also write the run report to this file");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--eps", o.eps, "Strictness margin (default 1e-6 * (1 + max |A_i|))")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", o.max_iters, "Solver iteration budget")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol_check, "Eigenvalue tolerance for accepting a solution")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Solver restart seed");
  };
  auto add_paths = [&](CLI::App* sub, int default_paths) {
    o.paths = default_paths;
    sub->add_option("--t-final", o.t_final, "Simulation horizon")->check(CLI::PositiveNumber);
    sub->add_option("--paths", o.paths, "Number of sample paths")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Master seed (generated and reported when omitted)");
    sub->add_option("--gains", o.gains_in, "Gains JSON from `synthesize` (closed loop)");
    sub->add_option("--h-scan", o.h_scan, "Region-exit scan step")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "Worker threads (0 = available parallelism)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check a model file");
  add_model(validate);
  auto* analyze = app.add_subcommand("analyze", "Certify stochastic stability");
  add_model(analyze);
  add_solver(analyze);
  auto* synth = app.add_subcommand("synthesize", "Synthesize stabilizing mode-dependent feedback");
  add_model(synth);
  add_solver(synth);
  synth->add_option("--out", o.gains_out, "Write the gains JSON here");
  auto* simulate = app.add_subcommand("simulate", "Write sample paths as CSV");
  add_model(simulate);
  add_paths(simulate, 1);
  simulate->add_option("--out-dir", o.out_dir, "Directory for trajectory and event CSVs");
  simulate->add_option("--sample-dt", o.sample_dt, "Output grid spacing (default t_final/1000)");
  auto* energy = app.add_subcommand("energy", "Monte Carlo estimate of E[int |x|^2 dt]");
  add_model(energy);
  add_paths(energy, 1000);

  Json report;
  int code = kOk;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    report["command"] = args.empty() ? "" : args.front();
    report["error"] = {{"kind", "Usage"}, {"message", e.what()}};
    report["exit_code"] = kInvalid;
    report["version"] = kVersion;
    out << report.dump(2) << '\n';
    return kInvalid;
  }

  for (auto* sub : app.get_subcommands()) o.command = sub->get_name();
  const bool randomized = o.command == "simulate" || o.command == "energy";
  if (randomized && !o.seed) {
    o.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    err << "seed: " << *o.seed << '\n';
  }

  report["command"] = o.command;
  report["model"] = o.model_path;
  report["options"] = options_json(o);
  if (o.seed) report["seed"] = *o.seed;

  try {
    Outcome r;
    if (o.command == "validate") r = cmd_validate(o, err);
    if (o.command == "analyze") r = cmd_analyze(o, err);
    if (o.command == "synthesize") r = cmd_synthesize(o, err);
    if (o.command == "simulate") r = cmd_simulate(o, err);
    if (o.command == "energy") r = cmd_energy(o, err);
    report["outcome"] = std::move(r.body);
    code = r.code;
  } catch (const IoError& e) {
    code = kIoError;
    report["error"] = {{"kind", "IO"}, {"message", e.what()}};
  } catch (const ParseError& e) {
    code = kIoError;
    report["error"] = {{"kind", "Parse"}, {"message", e.what()}};
  } catch (const ModelError& e) {
    code = kInvalid;
    Json list = Json::array();
    for (const auto& v : e.violations()) {
      list.push_back({{"kind", to_string(v.kind)}, {"field", v.field}, {"message", v.message}});
    }
    report["error"] = {{"kind", "Validation"}, {"message", e.what()}, {"violations", list}};
  } catch (const NoInputError& e) {
    code = kInvalid;
    report["error"] = {{"kind", "NoInput"}, {"message", e.what()}};
  } catch (const std::filesystem::filesystem_error& e) {
    code = kIoError;
    report["error"] = {{"kind", "IO"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    code = kNumeric;
    report["error"] = {{"kind", "Numeric"}, {"message", e.what()}};
  }
  if (report.contains("error")) err << "error: " << report["error"]["message"].get<std::string>() << '\n';

  report["exit_code"] = code;
  report["kernels"] = kernels::to_string(kernels::active_backend());
  report["version"] = kVersion;
  report["duration_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!o.report_path.empty()) {
    try {
      io::write_json_file(o.report_path, report);
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      if (code == kOk) code = kIoError;
    }
  }
  out << report.dump(2) << '\n';
  return code;
}

}  // namespace sdjls::cli
