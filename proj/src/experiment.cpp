#include "sgdpa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <set>
#include <sstream>

#include "sgdpa/errors.hpp"
#include "sgdpa/mpc.hpp"
#include "sgdpa/qcqp_io.hpp"

namespace sgdpa {

namespace {

using nlohmann::json;

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

StoppingRule stop_from(const json& j) {
  StoppingRule s;
  s.feas_sq_tol = j.value("feas_sq_tol", s.feas_sq_tol);
  s.gap_tol = j.value("gap_tol", s.gap_tol);
  s.stall_window = j.value("stall_window", s.stall_window);
  s.stall_tol = j.value("stall_tol", s.stall_tol);
  s.max_epochs = j.value("max_epochs", s.max_epochs);
  const auto point = j.value("evaluate_on", std::string("averaged"));
  if (point == "averaged") s.evaluate_on = MetricPoint::averaged;
  else if (point == "last") s.evaluate_on = MetricPoint::last;
  else throw ValidationError("evaluate_on must be 'averaged' or 'last'");
  const auto stall = j.value("stall_mode", std::string("automatic"));
  if (stall == "automatic") s.stall_mode = StallMode::automatic;
  else if (stall == "always") s.stall_mode = StallMode::always;
  else if (stall == "never") s.stall_mode = StallMode::never;
  else throw ValidationError("stall_mode must be 'automatic', 'always' or 'never'");
  s.validate();
  return s;
}

MethodSpec method_from(const json& j) {
  MethodSpec m;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sgdpa") m.kind = MethodSpec::Kind::sgdpa;
  else if (kind == "pdsg") m.kind = MethodSpec::Kind::pdsg;
  else if (kind == "lalm") m.kind = MethodSpec::Kind::lalm;
  else throw ValidationError("unknown method kind '" + kind + "'");
  m.name = j.value("name", kind);
  m.rho = j.value("rho", m.rho);
  m.tau = m.kind == MethodSpec::Kind::sgdpa ? j.value("tau", m.tau) : 0.0;
  if (m.kind == MethodSpec::Kind::lalm) m.schedule.kind = StepsizeSchedule::Kind::constant;
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    const auto sk = s.value("kind", to_string(m.schedule.kind));
    if (sk == "polynomial") m.schedule.kind = StepsizeSchedule::Kind::polynomial;
    else if (sk == "strongly_convex") m.schedule.kind = StepsizeSchedule::Kind::strongly_convex;
    else if (sk == "constant") m.schedule.kind = StepsizeSchedule::Kind::constant;
    else throw ValidationError("unknown schedule kind '" + sk + "'");
    if (s.contains("alpha0") && !s.at("alpha0").is_string()) m.schedule.alpha0 = s.at("alpha0").get<double>();
    m.schedule.gamma = s.value("gamma", 0.5);
    if (s.contains("mu") && !s.at("mu").is_string()) m.schedule.mu = s.at("mu").get<double>();
  }
  m.max_iters = j.value("max_iters", m.max_iters);
  if (j.contains("stop")) m.stop = stop_from(j.at("stop"));
  if (j.contains("restart")) {
    const auto& r = j.at("restart");
    RestartOptions o;
    o.initial_budget = r.value("initial_budget", o.initial_budget);
    o.budget_growth = r.value("budget_growth", o.budget_growth);
    o.step_shrink = r.value("step_shrink", o.step_shrink);
    if (r.contains("alpha0_initial")) o.alpha0_initial = r.at("alpha0_initial").get<double>();
    o.max_restarts = r.value("max_restarts", o.max_restarts);
    o.validate();
    m.restart = o;
  }
  PalParams{m.rho, m.tau}.validate();
  return m;
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct LoadedProblem {
  std::unique_ptr<QcqpProblem> problem;
  std::string id;
  std::optional<double> analytic_f_star;
};

LoadedProblem load_problem(const ProblemSource& src) {
  QcqpInstance inst;
  std::optional<double> radius = src.radius;
  std::optional<double> f_star;
  switch (src.kind) {
    case ProblemSource::Kind::generate:
      inst = generate(src.spec);
      break;
    case ProblemSource::Kind::instance:
      inst = src.inline_instance ? *src.inline_instance : read_instance(src.path);
      break;
    case ProblemSource::Kind::mpc_model: {
      const MpcScenario sc = read_scenario(src.path);
      inst = condense(sc.model, sc.ellipsoids, sc.x0).instance;
      if (!radius) radius = inst.simple_set.radius();
      break;
    }
    case ProblemSource::Kind::tiny: {
      auto t = tiny_analytic_instance();
      inst = t.instance;
      f_star = t.f_star;
      break;
    }
  }
  inst.validate();
  if (!radius) {
    radius = inst.simple_set.radius();
    if (!radius)
      radius = default_certificate_radius(inst.start_point.value_or(Vector::Zero(inst.q_f.size())));
  }
  LoadedProblem out;
  out.id = fnv1a(instance_to_json(inst));
  out.analytic_f_star = f_star;
  out.problem = std::make_unique<QcqpProblem>(std::move(inst), *radius);
  return out;
}

StepsizeSchedule make_schedule(const MethodSpec& m, const ConstrainedProblem& problem) {
  const PalParams pal{m.rho, m.tau};
  const double alpha0 = m.schedule.alpha0 ? *m.schedule.alpha0 : default_alpha0(problem, pal);
  switch (m.schedule.kind) {
    case StepsizeSchedule::Kind::polynomial:
      return StepsizeSchedule::polynomial(alpha0, m.schedule.gamma);
    case StepsizeSchedule::Kind::strongly_convex: {
      const double mu = m.schedule.mu ? *m.schedule.mu : problem.constants().mu;
      if (!(mu > 0.0)) throw ValidationError("strongly convex schedule needs mu > 0");
      return StepsizeSchedule::strongly_convex(alpha0, mu);
    }
    case StepsizeSchedule::Kind::constant:
      return StepsizeSchedule::constant(alpha0);
  }
  throw ValidationError("unknown schedule");
}

std::pair<SolveReport, Trace> run_method(const MethodSpec& m, const ConstrainedProblem& problem,
                                         std::uint64_t seed, std::optional<double> f_star,
                                         const TraceOptions& trace) {
  const StepsizeSchedule schedule = make_schedule(m, problem);
  if (m.kind == MethodSpec::Kind::sgdpa) {
    SgdpaConfig c;
    c.pal = {m.rho, m.tau};
    c.schedule = schedule;
    c.max_iters = m.max_iters;
    c.rng_seed = seed;
    c.stop = m.stop;
    c.reference_objective = f_star;
    c.trace = trace;
    if (m.restart) return solve_with_restarts(problem, c, *m.restart);
    return solve(problem, c);
  }
  BaselineConfig b;
  b.method = m.kind == MethodSpec::Kind::lalm ? BaselineConfig::Method::lalm
                                              : BaselineConfig::Method::pdsg;
  b.rho = m.rho;
  b.schedule = schedule;
  b.rng_seed = seed;
  b.stop = m.stop;
  b.max_iters = m.max_iters;
  b.reference_objective = f_star;
  b.trace = trace;
  return solve_baseline(problem, b);
}

json opt_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stat_json(const Stat& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

}  // namespace

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ValidationError("experiment needs at least one method");
  if (seeds.empty()) throw ValidationError("experiment needs at least one seed");
  std::set<std::string> names;
  for (const auto& m : methods) {
    if (m.name.empty()) throw ValidationError("method names must be nonempty");
    if (!names.insert(m.name).second) throw ValidationError("duplicate method name '" + m.name + "'");
    m.stop.validate();
    if (m.max_iters < 1) throw ValidationError("max_iters must be at least 1");
  }
  if (reference.kind == ReferenceSpec::Kind::analytic && problem.kind != ProblemSource::Kind::tiny)
    throw ValidationError("analytic reference requires the tiny problem source");
  if (problem.kind == ProblemSource::Kind::generate) problem.spec.validate();
}

MethodSpec method_spec_from_json(const std::string& text) {
  return guarded("method config", [&] { return method_from(json::parse(text)); });
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ExperimentConfig c = guarded("experiment config", [&] {
    const json j = json::parse(text);
    ExperimentConfig c;
    const auto& p = j.at("problem");
    const auto src = p.at("source").get<std::string>();
    if (src == "generate") {
      c.problem.kind = ProblemSource::Kind::generate;
      c.problem.spec = GenSpec::from_json(p.at("spec").dump());
    } else if (src == "instance" || src == "mpc_model") {
      c.problem.kind = src == "instance" ? ProblemSource::Kind::instance
                                         : ProblemSource::Kind::mpc_model;
      c.problem.path = p.at("path").get<std::string>();
    } else if (src == "tiny") {
      c.problem.kind = ProblemSource::Kind::tiny;
    } else {
      throw ValidationError("unknown problem source '" + src + "'");
    }
    if (p.contains("radius")) c.problem.radius = p.at("radius").get<double>();
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from(m));
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      const auto kind = r.at("kind").get<std::string>();
      if (kind == "none") c.reference.kind = ReferenceSpec::Kind::none;
      else if (kind == "analytic") c.reference.kind = ReferenceSpec::Kind::analytic;
      else if (kind == "external") {
        c.reference.kind = ReferenceSpec::Kind::external;
        c.reference.value = r.at("value").get<double>();
      } else if (kind == "baseline") {
        c.reference.kind = ReferenceSpec::Kind::baseline;
        c.reference.rho = r.value("rho", c.reference.rho);
        if (r.contains("alpha")) c.reference.alpha = r.at("alpha").get<double>();
        c.reference.max_iters = r.value("max_iters", c.reference.max_iters);
        c.reference.feas_sq_tol = r.value("feas_sq_tol", c.reference.feas_sq_tol);
      } else {
        throw ValidationError("unknown reference kind '" + kind + "'");
      }
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("trace")) {
      const auto& t = j.at("trace");
      c.trace.stride = t.value("stride", std::uint64_t{0});
      c.trace.points_per_decade = t.value("points_per_decade", 0);
    }
    c.trace.record_wall_time = false;
    return c;
  });
  c.validate();
  return c;
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(read_text_file(path));
}

Stat population_stat(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const LoadedProblem loaded = load_problem(config.problem);
  const ConstrainedProblem& problem = *loaded.problem;

  ExperimentSummary summary;
  summary.problem_id = loaded.id;
  std::optional<double> f_star;
  switch (config.reference.kind) {
    case ReferenceSpec::Kind::none:
      summary.reference_kind = "none";
      break;
    case ReferenceSpec::Kind::analytic:
      summary.reference_kind = "analytic";
      f_star = loaded.analytic_f_star;
      if (!f_star) throw ValidationError("problem has no analytic optimum");
      break;
    case ReferenceSpec::Kind::external:
      summary.reference_kind = "external";
      f_star = config.reference.value;
      break;
    case ReferenceSpec::Kind::baseline: {
      summary.reference_kind = "baseline";
      const auto& r = config.reference;
      const ReferenceSolution ref =
          reference_lalm(problem, r.rho, r.alpha, r.max_iters, r.feas_sq_tol);
      if (!ref.converged)
        throw ValidationError("reference LALM run did not reach feasibility_sq <= " +
                              format_real(r.feas_sq_tol) + " within " +
                              std::to_string(r.max_iters) + " iterations");
      f_star = ref.objective;
      summary.reference_detail = json{{"method", "lalm"},
                                      {"rho", r.rho},
                                      {"iterations", ref.iterations},
                                      {"feasibility_sq", ref.feasibility_sq},
                                      {"feas_sq_tol", r.feas_sq_tol}}
                                     .dump();
      break;
    }
  }
  summary.reference_value = f_star;

  const bool write = !config.output_dir.empty();
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir / "traces", ec);
    if (ec) throw IoError("cannot create output directory " + config.output_dir.string());
  }

  for (const auto& m : config.methods) {
    MethodStats st;
    st.method = m.name;
    std::vector<double> epochs, iters, gaps, viols;
    auto& traces = summary.traces[m.name];
    for (std::uint64_t seed : config.seeds) {
      RunResult r;
      r.method = m.name;
      r.seed = seed;
      ++st.runs;
      try {
        auto [report, trace] = run_method(m, problem, seed, f_star, config.trace);
        r.iterations = report.iterations;
        r.epochs = report.epochs;
        r.reason = to_string(report.reason);
        r.objective = report.final_report.objective;
        r.gap = report.final_report.objective_gap;
        r.mean_violation = report.final_report.mean_violation;
        r.feasibility_sq = report.final_report.feasibility_sq;
        r.restarts = report.restarts;
        epochs.push_back(r.epochs);
        iters.push_back(static_cast<double>(r.iterations));
        if (r.gap) gaps.push_back(*r.gap);
        viols.push_back(r.mean_violation);
        if (write) {
          std::ostringstream os;
          write_trace_csv(os, trace);
          write_text_file(config.output_dir / "traces" / (m.name + "_seed" + std::to_string(seed) + ".csv"),
                          os.str());
        }
        traces.push_back(std::move(trace));
      } catch (const DivergedError& e) {
        r.reason = "diverged";
        r.error = e.what();
        ++st.failures;
      }
      summary.runs.push_back(std::move(r));
    }
    st.epochs = population_stat(epochs);
    st.iterations = population_stat(iters);
    if (f_star && !gaps.empty()) st.gap = population_stat(gaps);
    st.mean_violation = population_stat(viols);
    summary.stats.push_back(std::move(st));
  }

  if (write) {
    write_text_file(config.output_dir / "summary.json", summary_to_json(summary));
    std::ostringstream os;
    compare_epochs({summary}).write_csv(os);
    write_text_file(config.output_dir / "comparison.csv", os.str());
  }
  return summary;
}

std::string summary_to_json(const ExperimentSummary& s) {
  json j;
  j["problem_id"] = s.problem_id;
  j["reference"] = {{"kind", s.reference_kind}, {"value", opt_real(s.reference_value)}};
  if (!s.reference_detail.empty()) j["reference"]["run"] = json::parse(s.reference_detail);
  j["runs"] = json::array();
  for (const auto& r : s.runs) {
    json e{{"method", r.method},         {"seed", r.seed},
           {"iterations", r.iterations}, {"epochs", r.epochs},
           {"reason", r.reason},         {"objective", r.objective},
           {"gap", opt_real(r.gap)},     {"mean_violation", r.mean_violation},
           {"feasibility_sq", r.feasibility_sq}, {"restarts", r.restarts}};
    if (!r.error.empty()) e["error"] = r.error;
    j["runs"].push_back(e);
  }
  j["methods"] = json::array();
  for (const auto& m : s.stats) {
    j["methods"].push_back({{"method", m.method},
                            {"runs", m.runs},
                            {"failures", m.failures},
                            {"epochs", stat_json(m.epochs)},
                            {"iterations", stat_json(m.iterations)},
                            {"gap", m.gap ? stat_json(*m.gap) : json(nullptr)},
                            {"mean_violation", stat_json(m.mean_violation)}});
  }
  return j.dump(2) + "\n";
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Last record with epoch ≤ e (the first record when none is).
const TraceRecord& record_at(const Trace& t, double e) {
  auto it = std::upper_bound(t.records.begin(), t.records.end(), e,
                             [](double v, const TraceRecord& r) { return v < r.epoch; });
  return it == t.records.begin() ? *it : *std::prev(it);
}

}  // namespace

EpochTable compare_epochs(const std::vector<ExperimentSummary>& summaries) {
  if (summaries.empty()) throw ValidationError("compare_epochs needs at least one summary");
  for (const auto& s : summaries)
    if (s.problem_id != summaries.front().problem_id)
      throw ValidationError("summaries come from different problems");

  std::vector<std::pair<std::string, const std::vector<Trace>*>> series;
  double max_epoch = 0.0;
  for (const auto& s : summaries) {
    for (const auto& m : s.stats) {
      const auto it = s.traces.find(m.method);
      if (it == s.traces.end() || it->second.empty()) continue;
      for (const auto& [name, _] : series)
        if (name == m.method) throw ValidationError("method '" + m.method + "' appears twice");
      series.emplace_back(m.method, &it->second);
      for (const auto& t : it->second)
        if (!t.records.empty()) max_epoch = std::max(max_epoch, t.records.back().epoch);
    }
  }

  EpochTable table;
  const auto last = static_cast<std::size_t>(std::floor(max_epoch));
  for (std::size_t e = 0; e <= last; ++e) table.epochs.push_back(static_cast<double>(e));
  for (const auto& [name, traces] : series) {
    table.methods.push_back(name);
    std::vector<std::optional<double>> gap_col;
    std::vector<double> viol_col;
    for (double e : table.epochs) {
      std::vector<double> g, v;
      bool all_gap = true;
      for (const auto& t : *traces) {
        const auto& r = record_at(t, e);
        v.push_back(r.mean_violation);
        if (r.gap) g.push_back(*r.gap);
        else all_gap = false;
      }
      gap_col.push_back(all_gap ? std::optional<double>(median_of(g)) : std::nullopt);
      viol_col.push_back(median_of(v));
    }
    table.median_gap.push_back(std::move(gap_col));
    table.median_violation.push_back(std::move(viol_col));
  }
  return table;
}

void EpochTable::write_csv(std::ostream& out) const {
  out << "epoch";
  for (const auto& m : methods) out << ',' << m << "_gap," << m << "_violation";
  out << '\n';
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    out << format_real(epochs[i]);
    for (std::size_t k = 0; k < methods.size(); ++k) {
      out << ',';
      if (median_gap[k][i]) out << format_real(*median_gap[k][i]);
      out << ',' << format_real(median_violation[k][i]);
    }
    out << '\n';
  }
}

std::optional<double> EpochTable::gap_at(const std::string& method, double epoch) const {
  const auto m = std::find(methods.begin(), methods.end(), method);
  if (m == methods.end()) throw ValidationError("no method '" + method + "' in the table");
  const auto e = std::find(epochs.begin(), epochs.end(), epoch);
  if (e == epochs.end()) return std::nullopt;
  return median_gap[static_cast<std::size_t>(m - methods.begin())]
                   [static_cast<std::size_t>(e - epochs.begin())];
}

}  // namespace sgdpa
