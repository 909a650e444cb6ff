#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rrl/model.hpp"
#include "rrl/objective.hpp"
#include "rrl/oracle.hpp"
#include "rrl/sdd.hpp"

namespace rrl {

enum class SolverChoice { Sdd, Oracle, Both };

SolverChoice parse_solver(const std::string& name);
std::string solver_name(SolverChoice s);

// Swept weight runs over [from, to] in `step` increments; the other weight is
// held at `fixed_other` (gamma sweep: phi fixed; phi sweep: gamma fixed).
struct SweepSpec {
    std::string param;  // "gamma" or "phi"
    double from = 0.0;
    double to = 1.0;
    double step = 0.1;
    double fixed_other = 1.0;
};

struct ExperimentConfig {
    std::string instance_path;
    std::string params_path;  // empty: defaults
    std::vector<std::pair<std::string, double>> overrides;
    SolverChoice solver = SolverChoice::Both;
    SddOptions sdd;
    OracleOptions oracle;
    std::optional<SweepSpec> sweep;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    // Largest coupling violation of the averaged primal for which a duality
    // gap is reported.
    double gap_feas_tol = 5e-2;
};

void validate_sweep(const SweepSpec& s);
std::vector<double> sweep_points(const SweepSpec& s);

// Splits overrides into SDD option keys (lambda_a, lambda_b, mu_a, mu_b, nu_a,
// nu_b, threads, window) and parameter keys; applies both.
void apply_overrides(ExperimentConfig& cfg, TradeoffParams& p);

// Loads instance and parameters named by the config and applies overrides.
struct LoadedProblem {
    NetworkInstance inst;
    DerivedSets sets;
    TradeoffParams params;
};
LoadedProblem load_problem(ExperimentConfig& cfg);

// 16 hex digits of FNV-1a over the config and the contents of its input files.
std::string config_hash(const ExperimentConfig& cfg);

struct RunOutcome {
    std::optional<SolveTrace> trace;
    std::optional<OracleSolution> oracle;
    nlohmann::json summary;
    bool converged = true;
};

RunOutcome run_experiment(const ExperimentConfig& cfg, const LoadedProblem& prob);

void write_plot_csv(std::ostream& out, const NetworkInstance& inst, const SolveTrace& trace);

// Writes <hash>_summary.json, and for SDD runs <hash>_trace.csv and
// <hash>_plot.csv. Returns the paths written.
std::vector<std::string> write_run_artifacts(const ExperimentConfig& cfg, const LoadedProblem& prob,
                                             const RunOutcome& outcome);

// True when every rate in `hi` exceeds the matching rate in `lo` by at least
// `margin` bit/s.
bool rates_dominate(const nlohmann::json& hi, const nlohmann::json& lo, double margin = 0.0);

struct SweepRow {
    double value = 0.0;
    double rate_utility = 0.0;         // sum_s rate_utility(x_s), unweighted
    double reliability_utility = 0.0;  // sum_s reliability_utility(R_s), unweighted
    double lifetime = 0.0;             // min_s T_s, seconds
    double total_utility = 0.0;        // sum_s W
    std::string status;
    std::string error;  // nonempty when the point failed
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool rate_nondecreasing = true;
    bool reliability_nonincreasing = true;
    bool lifetime_nonincreasing = true;
    int largest_lifetime_drop = -1;  // row index i of the largest drop from row i to i+1
};

// Monotonicity slack in utility units; lifetimes use it relative to the
// larger of the two lifetimes.
inline constexpr double kSweepSlack = 1e-3;

SweepResult run_sweep(const ExperimentConfig& cfg, const LoadedProblem& prob, int threads = 1);
void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& res);
nlohmann::json sweep_summary(const ExperimentConfig& cfg, const SweepResult& res);
std::vector<std::string> write_sweep_artifacts(const ExperimentConfig& cfg, const SweepResult& res);

}  // namespace rrl
