#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgdpa/baselines.hpp"
#include "sgdpa/qcqp_gen.hpp"
#include "sgdpa/sgdpa.hpp"

namespace sgdpa {

struct ProblemSource {
  enum class Kind { generate, instance, mpc_model, tiny };
  Kind kind = Kind::tiny;
  GenSpec spec;
  std::filesystem::path path;
  /// Instance already in memory; used instead of `path` for the instance kind.
  std::optional<QcqpInstance> inline_instance;
  /// Radius over which constants are certified; a default is derived when absent.
  std::optional<double> radius;
};

struct ScheduleSpec {
  StepsizeSchedule::Kind kind = StepsizeSchedule::Kind::polynomial;
  /// Absent means the default α₀ of the method on the loaded problem.
  std::optional<double> alpha0;
  double gamma = 0.5;
  /// Absent means the problem's certified μ.
  std::optional<double> mu;
};

struct MethodSpec {
  enum class Kind { sgdpa, pdsg, lalm };
  std::string name;
  Kind kind = Kind::sgdpa;
  double rho = 10.0;
  double tau = 1e-2;
  ScheduleSpec schedule;
  std::uint64_t max_iters = 100000;
  StoppingRule stop;
  /// SGDPA only: run through the trial-stepsize wrapper.
  std::optional<RestartOptions> restart;
};

struct ReferenceSpec {
  enum class Kind { none, analytic, external, baseline };
  Kind kind = Kind::none;
  double value = 0.0;
  double rho = 10.0;
  std::optional<double> alpha;
  std::uint64_t max_iters = 2000000;
  double feas_sq_tol = 1e-8;
};

struct ExperimentConfig {
  ProblemSource problem;
  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds;
  ReferenceSpec reference;
  std::filesystem::path output_dir;
  TraceOptions trace{0, 0, false};

  /// At least one method and one seed, unique method names, and a reference
  /// kind compatible with the problem source.
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig read_experiment_config(const std::filesystem::path& path);
MethodSpec method_spec_from_json(const std::string& text);

struct RunResult {
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  double epochs = 0.0;
  std::string reason;
  double objective = 0.0;
  std::optional<double> gap;
  double mean_violation = 0.0;
  double feasibility_sq = 0.0;
  int restarts = 0;
  /// Set when the run diverged; the other terminals are then meaningless.
  std::string error;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

struct MethodStats {
  std::string method;
  std::size_t runs = 0;
  std::size_t failures = 0;
  Stat epochs;
  Stat iterations;
  std::optional<Stat> gap;
  Stat mean_violation;
};

struct ExperimentSummary {
  /// FNV-1a hash of the loaded instance document.
  std::string problem_id;
  std::string reference_kind;
  std::optional<double> reference_value;
  /// Reference run audit trail (baseline reference only).
  std::string reference_detail;
  std::vector<RunResult> runs;
  std::vector<MethodStats> stats;
  /// Trace of every successful run, by method then in seed order.
  std::map<std::string, std::vector<Trace>> traces;
};

/// Mean and population standard deviation (normalized by the count).
Stat population_stat(const std::vector<double>& values);

/// Loads the problem as configured, resolves the reference, runs every
/// (method, seed) pair and, when output_dir is set, writes
/// traces/<method>_seed<seed>.csv, summary.json and comparison.csv.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// Methods' epoch-indexed seed-median series. Values at integer epoch e come
/// from each run's last record with epoch ≤ e, so runs that stop early
/// carry their terminal values forward.
struct EpochTable {
  std::vector<double> epochs;
  std::vector<std::string> methods;
  /// [method][epoch index]; gap entries are absent without a reference.
  std::vector<std::vector<std::optional<double>>> median_gap;
  std::vector<std::vector<double>> median_violation;

  void write_csv(std::ostream& out) const;
  std::optional<double> gap_at(const std::string& method, double epoch) const;
};

/// Throws ValidationError when the summaries come from different problems.
EpochTable compare_epochs(const std::vector<ExperimentSummary>& summaries);

std::string summary_to_json(const ExperimentSummary& summary);

}  // namespace sgdpa
