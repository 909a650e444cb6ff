#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrl/model.hpp"
#include "rrl/objective.hpp"
#include "rrl/sdd.hpp"

namespace rrl {

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleOptions {
    double tol = 1e-7;        // stationarity and constraint tolerance
    int max_outer = 60;
    int max_inner = 2000;
    std::uint64_t seed = 0;   // 0: start from the feasibility witness; else a random box point
};

enum class OracleStatus { Optimal, Stalled };

struct OracleSolution {
    PrimalState primal;
    double value = 0.0;        // sum of W at the primal point
    double upper_bound = 0.0;  // dual function at the multiplier estimates
    DualState multipliers;
    OracleStatus status = OracleStatus::Optimal;
    int outer_iterations = 0;
    int inner_iterations = 0;
    double grad_norm = 0.0;
    double max_violation = 0.0;
};

// Point with every rate at x_min and each route's error budget split evenly
// over its hops; throws InfeasibleError if it breaks a capacity.
PrimalState feasibility_witness(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p);

OracleSolution oracle_solve(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p,
                            const OracleOptions& opt = {});

struct DualEvaluation {
    double value;
    PrimalState argmax;
};

// Lagrange dual function: every node, link and code-rate subproblem solved
// exactly at the given prices, plus sum mu.
DualEvaluation dual_function(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p,
                             const DualState& dual);

// G(dual) - W_total(primal). Throws InfeasibleError when the primal violates a
// coupling constraint by more than feas_tol.
double duality_gap(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p,
                   const PrimalState& primal, const DualState& dual, double feas_tol = 1e-2);

struct BetaComparisonRow {
    double beta;
    std::vector<double> surrogate_rates;
    double surrogate_min_lifetime;
    double maxmin_lifetime;
    double gap;  // (maxmin - surrogate) / maxmin
};

// Splits a fixed aggregate rate over the sources. Compares the min lifetime
// reached by maximizing sum V^beta(T_s) with the grid-searched max-min
// lifetime. At most 3 sources.
std::vector<BetaComparisonRow> network_lifetime_exact_vs_beta(const NetworkInstance& inst,
                                                              const DerivedSets& sets,
                                                              const TradeoffParams& p,
                                                              const std::vector<double>& betas,
                                                              double total_rate);

}  // namespace rrl
