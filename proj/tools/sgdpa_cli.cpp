// Command-line front end: generate, solve, mpc, experiment, slope.
//
// Exit codes: 0 success, 2 validation error, 3 unconverged, 4 I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sgdpa/baselines.hpp"
#include "sgdpa/errors.hpp"
#include "sgdpa/experiment.hpp"
#include "sgdpa/mpc.hpp"
#include "sgdpa/qcqp_gen.hpp"
#include "sgdpa/qcqp_io.hpp"
#include "sgdpa/sgdpa.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kUnconverged = 3;
constexpr int kIo = 4;

using namespace sgdpa;

int run(int argc, char** argv) {
  CLI::App app{"SGDPA constrained optimization toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic QCQP instance");
  GenSpec spec;
  std::string objective = "convex", b_scenario = "uniform_random", linear = "positive";
  std::string gen_out;
  gen->add_option("--n", spec.n, "Dimension")->default_val(20);
  gen->add_option("--m", spec.m, "Number of constraints")->default_val(50);
  gen->add_option("--objective", objective)->check(CLI::IsMember({"convex", "strongly_convex"}));
  gen->add_option("--b-scenario", b_scenario)
      ->check(CLI::IsMember({"feasible_point_offset", "uniform_random"}));
  gen->add_option("--objective-linear", linear, "Support of q_f entries")
      ->check(CLI::IsMember({"positive", "negative", "symmetric"}));
  gen->add_option("--seed", spec.seed)->default_val(0);
  gen->add_option("-o,--out", gen_out, "Instance file")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Run one method on an instance file");
  std::string instance_path, method_kind = "sgdpa", trace_path, method_json;
  double rho = 10.0, tau = 1e-2, gamma = 0.5;
  std::optional<double> alpha0, f_star, radius, mu;
  std::string schedule_kind = "polynomial";
  std::uint64_t max_iters = 100000, seed = 0;
  std::optional<std::uint64_t> max_epochs;
  double feas_tol = 1e-2, gap_tol = 1e-2;
  sol->add_option("-i,--instance", instance_path)->required();
  sol->add_option("--method", method_kind)->check(CLI::IsMember({"sgdpa", "pdsg", "lalm"}));
  sol->add_option("--method-config", method_json, "Method JSON (overrides method flags)");
  sol->add_option("--rho", rho);
  sol->add_option("--tau", tau);
  sol->add_option("--schedule", schedule_kind)
      ->check(CLI::IsMember({"polynomial", "strongly_convex", "constant"}));
  sol->add_option("--alpha0", alpha0);
  sol->add_option("--gamma", gamma);
  sol->add_option("--mu", mu);
  sol->add_option("--max-iters", max_iters);
  sol->add_option("--max-epochs", max_epochs);
  sol->add_option("--seed", seed);
  sol->add_option("--f-star", f_star, "Reference optimal value");
  sol->add_option("--radius", radius, "Constant certification radius");
  sol->add_option("--feas-tol", feas_tol);
  sol->add_option("--gap-tol", gap_tol);
  sol->add_option("--trace", trace_path, "Trace CSV output");

  // mpc
  auto* mpc = app.add_subcommand("mpc", "Closed-loop receding-horizon simulation");
  std::string model_path, mpc_out;
  std::optional<double> mpc_alpha0;
  std::uint64_t mpc_iters = 20000, mpc_seed = 0;
  std::optional<std::size_t> mpc_steps;
  double mpc_tau = 1e-2, mpc_rho = 10.0;
  mpc->add_option("--model", model_path, "Model file (double integrator when omitted)");
  mpc->add_option("--steps", mpc_steps, "Override n_steps");
  mpc->add_option("--alpha0", mpc_alpha0);
  mpc->add_option("--max-iters", mpc_iters);
  mpc->add_option("--seed", mpc_seed);
  mpc->add_option("--rho", mpc_rho);
  mpc->add_option("--tau", mpc_tau);
  mpc->add_option("-o,--out", mpc_out, "Closed-loop CSV output");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment config");
  std::string config_path;
  std::optional<std::string> out_dir;
  exp->add_option("-c,--config", config_path)->required();
  exp->add_option("-o,--out", out_dir, "Override output_dir");

  // slope
  auto* slope = app.add_subcommand("slope", "Log-log slope of a trace metric");
  std::string slope_trace, metric = "gap";
  std::uint64_t k_lo = 1000, k_hi = 100000;
  slope->add_option("-t,--trace", slope_trace)->required();
  slope->add_option("--metric", metric)->check(CLI::IsMember({"gap", "mean_violation"}));
  slope->add_option("--from", k_lo);
  slope->add_option("--to", k_hi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (gen->parsed()) {
    spec.objective_kind = objective == "convex" ? GenSpec::ObjectiveKind::convex
                                                : GenSpec::ObjectiveKind::strongly_convex;
    spec.b_scenario = b_scenario == "uniform_random" ? GenSpec::BScenario::uniform_random
                                                     : GenSpec::BScenario::feasible_point_offset;
    spec.objective_linear = linear == "positive"   ? GenSpec::LinearSupport::positive
                            : linear == "negative" ? GenSpec::LinearSupport::negative
                                                   : GenSpec::LinearSupport::symmetric;
    write_instance(generate(spec), gen_out);
    return kOk;
  }

  if (sol->parsed()) {
    QcqpInstance inst = read_instance(instance_path);
    const double r = radius ? *radius
                            : inst.simple_set.radius().value_or(default_certificate_radius(
                                  inst.start_point.value_or(Vector::Zero(inst.q_f.size()))));
    const QcqpProblem problem(std::move(inst), r);

    ExperimentConfig cfg;
    MethodSpec m;
    if (!method_json.empty()) {
      m = method_spec_from_json(read_text_file(method_json));
    } else {
      m.kind = method_kind == "sgdpa"  ? MethodSpec::Kind::sgdpa
               : method_kind == "pdsg" ? MethodSpec::Kind::pdsg
                                       : MethodSpec::Kind::lalm;
      m.name = method_kind;
      m.rho = rho;
      m.tau = m.kind == MethodSpec::Kind::sgdpa ? tau : 0.0;
      m.schedule.kind = schedule_kind == "polynomial" ? StepsizeSchedule::Kind::polynomial
                        : schedule_kind == "constant" ? StepsizeSchedule::Kind::constant
                                                      : StepsizeSchedule::Kind::strongly_convex;
      m.schedule.alpha0 = alpha0;
      m.schedule.gamma = gamma;
      m.schedule.mu = mu;
      m.max_iters = max_iters;
      m.stop.feas_sq_tol = feas_tol;
      m.stop.gap_tol = gap_tol;
      if (max_epochs) m.stop.max_epochs = *max_epochs;
    }
    // A one-seed experiment on the in-memory instance.
    cfg.problem.kind = ProblemSource::Kind::instance;
    cfg.problem.inline_instance = problem.instance();
    cfg.problem.radius = r;
    cfg.methods = {m};
    cfg.seeds = {seed};
    if (f_star) {
      cfg.reference.kind = ReferenceSpec::Kind::external;
      cfg.reference.value = *f_star;
    }
    cfg.trace.record_wall_time = true;
    const ExperimentSummary summary = run_experiment(cfg);
    const RunResult& run = summary.runs.front();
    if (!run.error.empty()) {
      std::fprintf(stderr, "error: %s\n", run.error.c_str());
      return kUnconverged;
    }
    std::printf("stop_reason: %s\n", run.reason.c_str());
    std::printf("iterations: %llu\n", static_cast<unsigned long long>(run.iterations));
    std::printf("epochs: %s\n", format_real(run.epochs).c_str());
    std::printf("restarts: %d\n", run.restarts);
    std::printf("objective: %s\n", format_real(run.objective).c_str());
    if (run.gap) std::printf("gap: %s\n", format_real(*run.gap).c_str());
    std::printf("feasibility_sq: %s\n", format_real(run.feasibility_sq).c_str());
    std::printf("mean_violation: %s\n", format_real(run.mean_violation).c_str());
    if (!trace_path.empty()) {
      std::ostringstream os;
      write_trace_csv(os, summary.traces.at(m.name).front());
      write_text_file(trace_path, os.str());
    }
    return run.reason == "budget" ? kUnconverged : kOk;
  }

  if (mpc->parsed()) {
    MpcScenario sc = model_path.empty() ? double_integrator_scenario() : read_scenario(model_path);
    if (mpc_steps) sc.n_steps = *mpc_steps;
    MpcSolverOptions opt;
    opt.base.pal = {mpc_rho, mpc_tau};
    opt.base.max_iters = mpc_iters;
    opt.base.rng_seed = mpc_seed;
    opt.alpha0 = mpc_alpha0;
    const ClosedLoopTrace trace = receding_horizon(sc.model, sc.ellipsoids, sc.x0, sc.n_steps, opt);
    if (!mpc_out.empty()) {
      std::ostringstream os;
      trace.write_csv(os);
      write_text_file(mpc_out, os.str());
    } else {
      trace.write_csv(std::cout);
    }
    bool all = true;
    for (const auto& s : trace.steps) all = all && s.converged;
    std::fprintf(stderr, "final_state_norm: %s\n", format_real(trace.x_final.norm()).c_str());
    return all ? kOk : kUnconverged;
  }

  if (exp->parsed()) {
    ExperimentConfig cfg = read_experiment_config(config_path);
    if (out_dir) cfg.output_dir = *out_dir;
    const ExperimentSummary summary = run_experiment(cfg);
    std::cout << summary_to_json(summary);
    return kOk;
  }

  if (slope->parsed()) {
    std::ifstream in(slope_trace);
    if (!in) throw IoError("cannot open " + slope_trace);
    const Trace trace = read_trace_csv(in);
    const double s = rate_slope(trace, metric == "gap" ? RateMetric::gap : RateMetric::mean_violation,
                                k_lo, k_hi);
    std::printf("%s\n", format_real(s).c_str());
    return kOk;
  }
  return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sgdpa::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const sgdpa::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kValidation;
  } catch (const sgdpa::DivergedError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kUnconverged;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  }
}
