#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rrl/model.hpp"

namespace rrl {

// Per-source weights and bounds are stored as vectors indexed by source.
struct TradeoffParams {
    std::vector<double> gamma;
    std::vector<double> phi;
    double varpi = 3.2768e32;
    double alpha = 1.1;
    double beta = 9.0;
    double kappa = 20.0;
    std::vector<double> x_min;  // bit/s
    std::vector<double> x_max;  // bit/s
    std::vector<double> R_min;
    std::vector<double> R_max;

    std::size_t size() const { return gamma.size(); }
};

// Defaults used when a parameter document omits a field.
TradeoffParams default_params(std::size_t num_sources);

// Parameter document: scalars, or per-source maps keyed by sensor id for
// gamma, phi, x_min, x_max, R_min, R_max. Rates are given in Mbit/s.
TradeoffParams build_params(const nlohmann::json& doc, const NetworkInstance& inst);
TradeoffParams load_params(const std::string& path, const NetworkInstance& inst);

// Applies "key=value" (e.g. "gamma=0.5", "x_max=2.5") to every source.
void apply_override(TradeoffParams& p, const std::string& key, double value);
void validate_params(const TradeoffParams& p);

struct PrimalState {
    std::vector<double> x;      // bit/s
    std::vector<double> x_log;  // log x
    std::vector<double> R;
    std::vector<double> z;      // 1/s
    std::vector<double> r;      // per pair
    std::vector<double> c;      // per pair, bit/s
};

double error_prob(double r, double kappa);
double error_prob_deriv(double r, double kappa);

// 1 - sum E(r_l) and the exact product form prod (1 - E(r_l)).
double flow_reliability(const std::vector<double>& r, double kappa);
double flow_reliability_exact(const std::vector<double>& r, double kappa);

double rate_utility(double x, const TradeoffParams& p, int s);
double reliability_utility(double R, const TradeoffParams& p, int s);
double lifetime_penalty(double z, const TradeoffParams& p);

double rate_utility_deriv(double x, const TradeoffParams& p, int s);
double reliability_utility_deriv(double R, const TradeoffParams& p, int s);
double lifetime_penalty_deriv(double z, const TradeoffParams& p);

double combined_objective(double x, double R, double z, const TradeoffParams& p, int s);
double combined_objective_log(double x_log, double R, double z, const TradeoffParams& p, int s);
double total_objective(const PrimalState& st, const TradeoffParams& p);

struct Gradient {
    double d_xlog;
    double d_R;
    double d_z;
};
Gradient gradients(double x_log, double R, double z, const TradeoffParams& p, int s);

double lifetime_utility_beta(double T, double beta);

// Signed violations of the coupling constraints (positive means violated).
struct ConstraintResiduals {
    std::vector<double> capacity;     // per pair: x' - log c - log r
    std::vector<double> reliability;  // per source: R_s - (1 - sum E(r))
    std::vector<double> energy;       // per source: (p_s - e_s z_s) / (e_s z_s)
    std::vector<double> link_budget;  // per link: sum c - C_l
    double max_capacity() const;
    double max_abs_reliability() const;
    double max_abs_energy() const;
};
ConstraintResiduals constraint_residuals(const NetworkInstance& inst, const DerivedSets& sets,
                                         const TradeoffParams& p, const PrimalState& st);

// End-to-end reliability 1 - sum E(r) of source s from per-pair code rates.
double route_reliability(const DerivedSets& sets, const std::vector<double>& r, double kappa, int s);

}  // namespace rrl
