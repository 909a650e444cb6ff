#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rrl/experiments.hpp"

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNotConverged = 2, kIo = 3 };

struct Flags {
    std::string instance;
    std::string params;
    std::vector<std::string> sets;
    std::string solver = "both";
    std::string out = "out";
    std::string sweep;
    double from = 0.0, to = 1.0, step = 0.1, fixed = 1.0;
    std::uint64_t seed = 0;
    int max_iters = -1;
    double tol = -1.0;
    int threads = 1;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--instance", f.instance, "network instance JSON")->required();
    cmd->add_option("--params", f.params, "tradeoff parameter JSON (defaults when omitted)");
    cmd->add_option("--set", f.sets, "override key=value, e.g. gamma=0.5, beta=5, mu_a=300");
}

void add_solver(CLI::App* cmd, Flags& f) {
    cmd->add_option("--solver", f.solver, "sdd, oracle or both");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "oracle start seed; 0 uses the feasibility witness");
    cmd->add_option("--max-iters", f.max_iters, "SDD round limit");
    cmd->add_option("--tol", f.tol, "SDD relative stop tolerance on the averaged objective");
    cmd->add_option("--threads", f.threads, "worker threads");
}

rrl::ExperimentConfig to_config(const Flags& f) {
    rrl::ExperimentConfig cfg;
    cfg.instance_path = f.instance;
    cfg.params_path = f.params;
    for (const std::string& kv : f.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw rrl::ValidationError("--set", "expected key=value, got '" + kv + "'");
        std::string val = kv.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != val.size()) throw rrl::ValidationError("--set " + kv.substr(0, eq), "not a number");
        cfg.overrides.emplace_back(kv.substr(0, eq), v);
    }
    cfg.solver = rrl::parse_solver(f.solver);
    cfg.out_dir = f.out;
    cfg.seed = f.seed;
    if (f.max_iters >= 0) {
        if (f.max_iters == 0) throw rrl::ValidationError("--max-iters", "must be positive");
        cfg.sdd.stop.max_iters = f.max_iters;
    }
    if (f.tol >= 0.0) cfg.sdd.stop.tol = f.tol;
    if (f.threads < 1) throw rrl::ValidationError("--threads", "must be at least 1");
    cfg.sdd.threads = f.threads;
    return cfg;
}

int cmd_validate(const Flags& f) {
    rrl::ExperimentConfig cfg = to_config(f);
    rrl::LoadedProblem prob = rrl::load_problem(cfg);
    const auto& inst = prob.inst;
    const auto& sets = prob.sets;
    std::printf("OK, %zu sources, %zu links\n", inst.num_sources(), inst.num_links());
    std::printf("links (route-induced sources, tx energy nJ/bit):\n");
    for (std::size_t l = 0; l < inst.num_links(); ++l) {
        const auto& link = inst.links[l];
        std::printf("  %s %s->%s C=%.4g kbit/s d=%.4g m p^t=%.6g nJ/bit sources=[", link.id.c_str(),
                    inst.sensor_nodes[static_cast<std::size_t>(link.tail)].c_str(), link.head_id.c_str(),
                    link.capacity / 1e3, link.distance, sets.link_tx_power[l] * 1e9);
        for (std::size_t k = 0; k < sets.sources_on_link[l].size(); ++k)
            std::printf("%s%s", k ? "," : "", inst.sensor_nodes[static_cast<std::size_t>(sets.sources_on_link[l][k])].c_str());
        std::printf("]\n");
    }
    std::printf("sources (route, relays, energy J):\n");
    for (std::size_t s = 0; s < inst.num_sources(); ++s) {
        std::printf("  %s route=[", inst.sensor_nodes[s].c_str());
        for (std::size_t k = 0; k < inst.routes[s].size(); ++k)
            std::printf("%s%s", k ? "," : "", inst.links[static_cast<std::size_t>(inst.routes[s][k])].id.c_str());
        std::printf("] relays_for=[");
        for (std::size_t k = 0; k < sets.relayed_sources[s].size(); ++k)
            std::printf("%s%s", k ? "," : "", inst.sensor_nodes[static_cast<std::size_t>(sets.relayed_sources[s][k])].c_str());
        std::printf("] e=%.6g gamma=%.4g phi=%.4g x=[%.6g, %.6g] kbit/s R=[%.6g, %.6g]\n", inst.initial_energy[s],
                    prob.params.gamma[s], prob.params.phi[s], prob.params.x_min[s] / 1e3, prob.params.x_max[s] / 1e3,
                    prob.params.R_min[s], prob.params.R_max[s]);
    }
    try {
        rrl::feasibility_witness(inst, sets, prob.params);
        std::printf("feasibility: ok (minimum rates with even error budgets fit every link)\n");
    } catch (const rrl::InfeasibleError& e) {
        std::fprintf(stderr, "feasibility: %s\n", e.what());
        return kInvalid;
    }
    return kOk;
}

void print_paths(const std::vector<std::string>& paths) {
    for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
}

int cmd_run(const Flags& f) {
    rrl::ExperimentConfig cfg = to_config(f);
    rrl::LoadedProblem prob = rrl::load_problem(cfg);
    rrl::RunOutcome out;
    try {
        out = rrl::run_experiment(cfg, prob);
    } catch (const rrl::InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kInvalid;
    }
    print_paths(rrl::write_run_artifacts(cfg, prob, out));
    const auto& s = out.summary;
    std::printf("status=%s total_utility=%.10g min_T=%.6g s\n", s["status"].get<std::string>().c_str(),
                s["total_utility"].get<double>(), s["min_T"].get<double>());
    if (s.contains("duality_gap") && s["duality_gap"].contains("relative"))
        std::printf("duality_gap_relative=%.3e\n", s["duality_gap"]["relative"].get<double>());
    return out.converged ? kOk : kNotConverged;
}

int cmd_sweep(const Flags& f) {
    rrl::ExperimentConfig cfg = to_config(f);
    if (cfg.solver == rrl::SolverChoice::Both) cfg.solver = rrl::SolverChoice::Sdd;
    rrl::SweepSpec sw;
    sw.param = f.sweep;
    sw.from = f.from;
    sw.to = f.to;
    sw.step = f.step;
    sw.fixed_other = f.fixed;
    rrl::validate_sweep(sw);
    cfg.sweep = sw;
    rrl::LoadedProblem prob = rrl::load_problem(cfg);
    rrl::SweepResult res = rrl::run_sweep(cfg, prob, f.threads);
    print_paths(rrl::write_sweep_artifacts(cfg, res));
    rrl::write_sweep_csv(std::cout, cfg, res);
    bool all_ok = true;
    for (const auto& row : res.rows)
        if (row.status != "converged" && row.status != "optimal") all_ok = false;
    return all_ok ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rate, reliability and lifetime tradeoff solver for multihop sensor networks"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* validate = app.add_subcommand("validate", "check an instance and parameters");
    add_common(validate, f);

    CLI::App* run = app.add_subcommand("run", "solve one configuration and write artifacts");
    add_common(run, f);
    add_solver(run, f);

    CLI::App* sweep = app.add_subcommand("sweep", "solve over a range of one weight");
    add_common(sweep, f);
    add_solver(sweep, f);
    sweep->add_option("--sweep", f.sweep, "swept weight: gamma or phi")->required();
    sweep->add_option("--from", f.from, "first value");
    sweep->add_option("--to", f.to, "last value");
    sweep->add_option("--step", f.step, "increment");
    sweep->add_option("--fixed", f.fixed, "value of the other weight");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*validate) return cmd_validate(f);
        if (*run) return cmd_run(f);
        return cmd_sweep(f);
    } catch (const rrl::ValidationError& e) {
        std::fprintf(stderr, "invalid: %s\n", e.what());
        return kInvalid;
    } catch (const rrl::IoError& e) {
        std::fprintf(stderr, "io: %s\n", e.what());
        return kIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvalid;
    }
}
