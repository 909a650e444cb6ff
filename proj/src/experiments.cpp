#include "rrl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace rrl {

namespace fs = std::filesystem;
using nlohmann::json;

SolverChoice parse_solver(const std::string& name) {
    if (name == "sdd") return SolverChoice::Sdd;
    if (name == "oracle") return SolverChoice::Oracle;
    if (name == "both") return SolverChoice::Both;
    throw ValidationError("solver", "expected sdd, oracle or both, got '" + name + "'");
}

std::string solver_name(SolverChoice s) {
    switch (s) {
    case SolverChoice::Sdd: return "sdd";
    case SolverChoice::Oracle: return "oracle";
    case SolverChoice::Both: return "both";
    }
    return "?";
}

void validate_sweep(const SweepSpec& s) {
    if (s.param != "gamma" && s.param != "phi")
        throw ValidationError("sweep", "swept parameter must be gamma or phi");
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(s.from)) throw ValidationError("sweep.from", "must lie in [0,1]");
    if (!in_unit(s.to)) throw ValidationError("sweep.to", "must lie in [0,1]");
    if (!in_unit(s.fixed_other)) throw ValidationError("sweep.fixed", "must lie in [0,1]");
    if (!(s.step > 0.0)) throw ValidationError("sweep.step", "must be positive");
    if (s.to < s.from) throw ValidationError("sweep.to", "must not be below sweep.from");
}

std::vector<double> sweep_points(const SweepSpec& s) {
    validate_sweep(s);
    // Points are from + k step, computed by index so no error accumulates.
    const long n = static_cast<long>(std::floor((s.to - s.from) / s.step + 1e-9));
    std::vector<double> pts;
    for (long k = 0; k <= n; ++k) pts.push_back(std::min(s.to, s.from + static_cast<double>(k) * s.step));
    return pts;
}

void apply_overrides(ExperimentConfig& cfg, TradeoffParams& p) {
    for (const auto& [key, value] : cfg.overrides) {
        Schedules& sch = cfg.sdd.schedules;
        if (key == "lambda_a") sch.lambda.a = value;
        else if (key == "lambda_b") sch.lambda.b = value;
        else if (key == "mu_a") sch.mu.a = value;
        else if (key == "mu_b") sch.mu.b = value;
        else if (key == "nu_a") sch.nu.a = value;
        else if (key == "nu_b") sch.nu.b = value;
        else if (key == "threads") cfg.sdd.threads = static_cast<int>(value);
        else if (key == "window") cfg.sdd.stop.window = static_cast<int>(value);
        else apply_override(p, key, value);
    }
    validate_params(p);
}

LoadedProblem load_problem(ExperimentConfig& cfg) {
    LoadedProblem prob{load_instance(cfg.instance_path), {}, {}};
    prob.sets = derive_sets(prob.inst);
    prob.params = cfg.params_path.empty() ? default_params(prob.inst.num_sources())
                                          : load_params(cfg.params_path, prob.inst);
    apply_overrides(cfg, prob.params);
    return prob;
}

namespace {

std::string slurp(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json schedule_json(const StepsizeSchedule& s) {
    return {{"kind", static_cast<int>(s.kind)}, {"a", s.a}, {"b", s.b}};
}

json config_json(const ExperimentConfig& cfg) {
    json j;
    j["solver"] = solver_name(cfg.solver);
    j["overrides"] = json::array();
    for (const auto& [k, v] : cfg.overrides) j["overrides"].push_back({k, v});
    j["schedules"] = {schedule_json(cfg.sdd.schedules.lambda), schedule_json(cfg.sdd.schedules.mu),
                      schedule_json(cfg.sdd.schedules.nu)};
    j["stop"] = {cfg.sdd.stop.max_iters, cfg.sdd.stop.window, cfg.sdd.stop.tol, cfg.sdd.stop.residual_tol};
    j["oracle"] = {cfg.oracle.tol, cfg.oracle.max_outer, cfg.oracle.max_inner};
    j["seed"] = cfg.seed;
    j["gap_feas_tol"] = cfg.gap_feas_tol;
    if (cfg.sweep)
        j["sweep"] = {cfg.sweep->param, cfg.sweep->from, cfg.sweep->to, cfg.sweep->step, cfg.sweep->fixed_other};
    return j;
}

json per_source(const NetworkInstance& inst, const std::vector<double>& v) {
    json j = json::object();
    for (std::size_t s = 0; s < inst.num_sources(); ++s) j[inst.sensor_nodes[s]] = v[s];
    return j;
}

json primal_json(const LoadedProblem& prob, const PrimalState& st) {
    const auto& inst = prob.inst;
    std::vector<double> T;
    for (std::size_t s = 0; s < inst.num_sources(); ++s)
        T.push_back(node_lifetime(inst, node_power(inst, prob.sets, st.x, static_cast<int>(s)), static_cast<int>(s)));
    json j;
    j["x"] = per_source(inst, st.x);
    j["R"] = per_source(inst, st.R);
    j["T"] = per_source(inst, T);
    j["min_T"] = *std::min_element(T.begin(), T.end());
    j["total_utility"] = total_objective(st, prob.params);
    return j;
}

std::string trace_status(SolveStatus s) { return s == SolveStatus::Converged ? "converged" : "max_iterations"; }
std::string oracle_status(OracleStatus s) { return s == OracleStatus::Optimal ? "optimal" : "stalled"; }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

fs::path ensure_out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

std::string config_hash(const ExperimentConfig& cfg) {
    std::string text = config_json(cfg).dump() + '\0' + slurp(cfg.instance_path) + '\0' + slurp(cfg.params_path);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const LoadedProblem& prob) {
    RunOutcome out;
    json& sum = out.summary;
    sum["config_hash"] = config_hash(cfg);
    sum["solver"] = solver_name(cfg.solver);
    sum["sources"] = prob.inst.sensor_nodes;

    if (cfg.solver != SolverChoice::Oracle) {
        out.trace = sdd_solve(prob.inst, prob.sets, prob.params, cfg.sdd);
        const SolveTrace& tr = *out.trace;
        json j = primal_json(prob, tr.averaged);
        j["status"] = trace_status(tr.status);
        j["iterations"] = tr.iterations;
        j["last_total_utility"] = total_objective(tr.last, prob.params);
        ConstraintResiduals res = constraint_residuals(prob.inst, prob.sets, prob.params, tr.averaged);
        double rel = 0.0, en = 0.0;
        for (double v : res.reliability) rel = std::max(rel, v);
        for (double v : res.energy) en = std::max(en, v);
        j["violations"] = {{"capacity", std::max(0.0, res.max_capacity())}, {"reliability", rel}, {"energy", en}};
        sum["sdd"] = j;
        out.converged = out.converged && tr.status == SolveStatus::Converged;
    }
    if (cfg.solver != SolverChoice::Sdd) {
        OracleOptions oo = cfg.oracle;
        oo.seed = cfg.seed;
        out.oracle = oracle_solve(prob.inst, prob.sets, prob.params, oo);
        const OracleSolution& o = *out.oracle;
        json j = primal_json(prob, o.primal);
        j["status"] = oracle_status(o.status);
        j["value"] = o.value;
        j["upper_bound"] = o.upper_bound;
        j["outer_iterations"] = o.outer_iterations;
        j["inner_iterations"] = o.inner_iterations;
        j["grad_norm"] = o.grad_norm;
        j["max_violation"] = o.max_violation;
        sum["oracle"] = j;
        out.converged = out.converged && o.status == OracleStatus::Optimal;
    }
    if (out.trace && out.oracle) {
        const SolveTrace& tr = *out.trace;
        double opt = out.oracle->value;
        double w = total_objective(tr.averaged, prob.params);
        sum["utility_vs_oracle_relative"] = (w - opt) / std::abs(opt);
        try {
            double gap = duality_gap(prob.inst, prob.sets, prob.params, tr.averaged, tr.averaged_dual, cfg.gap_feas_tol);
            sum["duality_gap"] = {{"value", gap}, {"relative", gap / std::abs(opt)}};
        } catch (const InfeasibleError& e) {
            sum["duality_gap"] = {{"error", e.what()}};
        }
    }

    const json& primary = out.trace ? sum["sdd"] : sum["oracle"];
    for (const char* k : {"x", "R", "T", "min_T", "total_utility", "status"}) sum[k] = primary[k];
    return out;
}

void write_plot_csv(std::ostream& out, const NetworkInstance& inst, const SolveTrace& trace) {
    out << "iteration";
    for (const auto& id : inst.sensor_nodes) out << ",x_" << id;
    out << ",total_utility,avg_total_utility\n";
    for (const TraceRow& row : trace.rows) {
        out << row.t;
        for (double v : row.x) {
            out << ',';
            put(out, v);
        }
        out << ',';
        put(out, row.objective);
        out << ',';
        put(out, row.avg_objective);
        out << '\n';
    }
}

std::vector<std::string> write_run_artifacts(const ExperimentConfig& cfg, const LoadedProblem& prob,
                                             const RunOutcome& outcome) {
    fs::path dir = ensure_out_dir(cfg);
    const std::string h = outcome.summary.at("config_hash");
    std::vector<std::string> paths;
    fs::path sp = dir / (h + "_summary.json");
    write_file(sp, outcome.summary.dump(2) + "\n");
    paths.push_back(sp.string());
    if (outcome.trace) {
        std::ostringstream tr, pl;
        write_trace_csv(tr, prob.inst, prob.sets, *outcome.trace);
        write_plot_csv(pl, prob.inst, *outcome.trace);
        fs::path tp = dir / (h + "_trace.csv"), pp = dir / (h + "_plot.csv");
        write_file(tp, tr.str());
        write_file(pp, pl.str());
        paths.push_back(tp.string());
        paths.push_back(pp.string());
    }
    return paths;
}

bool rates_dominate(const json& hi, const json& lo, double margin) {
    const json& xh = hi.at("x");
    const json& xl = lo.at("x");
    if (xh.size() != xl.size()) return false;
    for (auto it = xh.begin(); it != xh.end(); ++it) {
        if (!xl.contains(it.key())) return false;
        if (!(it.value().get<double>() >= xl.at(it.key()).get<double>() + margin)) return false;
    }
    return true;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const LoadedProblem& prob, int threads) {
    if (!cfg.sweep) throw ValidationError("sweep", "no sweep configured");
    const SweepSpec& sw = *cfg.sweep;
    std::vector<double> pts = sweep_points(sw);
    const std::string other = sw.param == "gamma" ? "phi" : "gamma";

    SweepResult res;
    res.rows.resize(pts.size());
    auto solve_point = [&](int i) {
        SweepRow& row = res.rows[static_cast<std::size_t>(i)];
        row.value = pts[static_cast<std::size_t>(i)];
        try {
            TradeoffParams p = prob.params;
            apply_override(p, other, sw.fixed_other);
            apply_override(p, sw.param, row.value);
            PrimalState st;
            if (cfg.solver == SolverChoice::Oracle) {
                OracleOptions oo = cfg.oracle;
                oo.seed = cfg.seed;
                OracleSolution o = oracle_solve(prob.inst, prob.sets, p, oo);
                st = o.primal;
                row.status = oracle_status(o.status);
            } else {
                SddOptions so = cfg.sdd;
                so.threads = 1;
                SolveTrace tr = sdd_solve(prob.inst, prob.sets, p, so);
                st = tr.averaged;
                row.status = trace_status(tr.status);
            }
            for (std::size_t s = 0; s < st.x.size(); ++s) {
                row.rate_utility += rate_utility(st.x[s], p, static_cast<int>(s));
                row.reliability_utility += reliability_utility(st.R[s], p, static_cast<int>(s));
            }
            row.lifetime = network_lifetime(prob.inst, prob.sets, st.x);
            row.total_utility = total_objective(st, p);
        } catch (const std::exception& e) {
            row.status = "failed";
            row.error = e.what();
        }
    };
    if (threads > 1) {
        AgentPool pool(threads);
        pool.parallel_for(static_cast<int>(pts.size()), solve_point);
    } else {
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) solve_point(i);
    }

    double worst_drop = 0.0;
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i) {
        const SweepRow& a = res.rows[i];
        const SweepRow& b = res.rows[i + 1];
        if (!a.error.empty() || !b.error.empty()) continue;
        if (b.rate_utility < a.rate_utility - kSweepSlack) res.rate_nondecreasing = false;
        if (b.reliability_utility > a.reliability_utility + kSweepSlack) res.reliability_nonincreasing = false;
        if (b.lifetime > a.lifetime + kSweepSlack * std::max(a.lifetime, b.lifetime)) res.lifetime_nonincreasing = false;
        double drop = a.lifetime - b.lifetime;
        if (drop > worst_drop) {
            worst_drop = drop;
            res.largest_lifetime_drop = static_cast<int>(i);
        }
    }
    return res;
}

void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& res) {
    const std::string& swept = cfg.sweep ? cfg.sweep->param : std::string("value");
    out << swept
        << ",sum_rate_utility_unweighted,sum_reliability_utility_unweighted,network_lifetime_s,total_utility,status\n";
    for (const SweepRow& row : res.rows) {
        put(out, row.value);
        for (double v : {row.rate_utility, row.reliability_utility, row.lifetime, row.total_utility}) {
            out << ',';
            put(out, v);
        }
        out << ',' << row.status << '\n';
    }
}

json sweep_summary(const ExperimentConfig& cfg, const SweepResult& res) {
    json j;
    j["config_hash"] = config_hash(cfg);
    j["solver"] = cfg.solver == SolverChoice::Oracle ? "oracle" : "sdd";
    if (cfg.sweep)
        j["sweep"] = {{"param", cfg.sweep->param},
                      {"from", cfg.sweep->from},
                      {"to", cfg.sweep->to},
                      {"step", cfg.sweep->step},
                      {"fixed_other", cfg.sweep->fixed_other}};
    j["slack"] = kSweepSlack;
    j["rate_utility_nondecreasing"] = res.rate_nondecreasing;
    j["reliability_utility_nonincreasing"] = res.reliability_nonincreasing;
    j["lifetime_nonincreasing"] = res.lifetime_nonincreasing;
    j["largest_lifetime_drop_after"] =
        res.largest_lifetime_drop >= 0 ? json(res.rows[static_cast<std::size_t>(res.largest_lifetime_drop)].value)
                                       : json(nullptr);
    json failures = json::array();
    for (const SweepRow& row : res.rows)
        if (!row.error.empty()) failures.push_back({{"value", row.value}, {"error", row.error}});
    j["failures"] = failures;
    return j;
}

std::vector<std::string> write_sweep_artifacts(const ExperimentConfig& cfg, const SweepResult& res) {
    fs::path dir = ensure_out_dir(cfg);
    const std::string h = config_hash(cfg);
    std::ostringstream csv;
    write_sweep_csv(csv, cfg, res);
    fs::path cp = dir / (h + "_sweep.csv"), sp = dir / (h + "_sweep_summary.json");
    write_file(cp, csv.str());
    write_file(sp, sweep_summary(cfg, res).dump(2) + "\n");
    return {cp.string(), sp.string()};
}

}  // namespace rrl
