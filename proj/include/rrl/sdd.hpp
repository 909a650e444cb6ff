#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rrl/model.hpp"
#include "rrl/objective.hpp"
#include "rrl/subproblems.hpp"

namespace rrl {

struct DualState {
    std::vector<double> lambda;  // per pair
    std::vector<double> mu;      // per source
    std::vector<double> nu;      // per source
};

enum class StepKind { Harmonic, ScaledHarmonic, Constant };

// step(t) = a / (b + t) for the harmonic kinds, a for Constant. ScaledHarmonic
// additionally multiplies by a per-agent weight supplied by the caller.
struct StepsizeSchedule {
    StepKind kind = StepKind::Harmonic;
    double a = 1.0;
    double b = 50.0;
    double step(int t) const;
};

struct Schedules {
    StepsizeSchedule lambda{StepKind::Harmonic, 1.0, 50.0};
    StepsizeSchedule mu{StepKind::Harmonic, 300.0, 50.0};
    StepsizeSchedule nu{StepKind::ScaledHarmonic, 20.0, 1000.0};
};

struct StopRule {
    int max_iters = 50000;
    int window = 100;
    double tol = 1e-5;  // 0 disables the tolerance test
    // The tolerance test also requires every averaged-primal violation (log
    // capacity, reliability, relative energy) to be below this.
    double residual_tol = 1e-3;
};

struct SddOptions {
    Schedules schedules;
    StopRule stop;
    int threads = 1;  // >1 runs agents of one phase concurrently
};

struct RoundMessages {
    struct LinkToNode {
        int link, source;
        double lambda, r;
    };
    struct NodeToLink {
        int source, link;
        double x, mu;
    };
    struct RelayToSource {
        int relay, source;
        double nu;
    };
    struct SourceToRelay {
        int source, relay;
        double x;
    };
    std::vector<LinkToNode> link_to_node;
    std::vector<NodeToLink> node_to_link;
    std::vector<RelayToSource> relay_to_source;
    std::vector<SourceToRelay> source_to_relay;
};

// Projected subgradient price updates.
// lambda: [lambda - delta (log c + log r - log x)]^+
double update_congestion_price(double lambda, double delta, double c, double r, double x);
// mu: [mu - zeta (R^s - R)]^+ with R^s the route reliability from code rates
double update_reliability_price(double mu, double zeta, double route_reliability, double R);
// nu: [nu - theta (e z - power)]^+ with power the node's own plus relay draw
double update_energy_price(double nu, double theta, double budget, double power);

class AgentPool;

// Immutable problem data shared by all agents.
struct SddContext {
    const NetworkInstance* inst;
    const DerivedSets* sets;
    const TradeoffParams* params;
    ZBox zbox;

    SddContext(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& params);
};

// Per-node scale of the ScaledHarmonic energy step: reciprocal dual curvature
// of the z-part at the node's current z, (1-gamma) varpi (beta-2) z^(beta-3) / e^2,
// with 1-gamma floored at 1e-2.
double energy_step_weight(const TradeoffParams& p, double energy, double z, int s);

DualState initial_dual(const SddContext& ctx);
PrimalState initial_primal(const SddContext& ctx);

struct RoundResult {
    PrimalState primal;
    DualState dual;
    RoundMessages messages;
};

// One synchronous round: every agent solves from the prices of round t, then
// every price is updated from the fresh decisions. `pool` may be null.
RoundResult run_round(const SddContext& ctx, const DualState& dual, const Schedules& sch, int t,
                      AgentPool* pool = nullptr, bool record_messages = true);

struct TraceRow {
    int t;
    std::vector<double> x, R, z, lambda, mu, nu;
    double objective;
    double avg_objective;
    double res_capacity;
    double res_reliability;
    double res_energy;
};

enum class SolveStatus { Converged, MaxIterations };

struct SolveTrace {
    std::vector<TraceRow> rows;
    PrimalState last;
    PrimalState averaged;
    DualState last_dual;
    DualState averaged_dual;
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;
};

SolveTrace sdd_solve(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& params,
                     const SddOptions& opt);

void write_trace_csv(std::ostream& out, const NetworkInstance& inst, const DerivedSets& sets,
                     const SolveTrace& trace);

// Runs fn(i) for i in [0, n) on a fixed set of worker threads; blocks until done.
class AgentPool {
public:
    explicit AgentPool(int threads);
    ~AgentPool();
    AgentPool(const AgentPool&) = delete;
    AgentPool& operator=(const AgentPool&) = delete;
    void parallel_for(int n, const std::function<void(int)>& fn);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rrl
