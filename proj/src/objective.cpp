#include "rrl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrl {

using nlohmann::json;

namespace {

constexpr double kDomainSlack = 1e-12;

void check_box(double v, double lo, double hi, const char* what) {
    double pad = kDomainSlack * std::max(std::abs(lo), std::abs(hi));
    if (!(v >= lo - pad && v <= hi + pad)) throw std::domain_error(std::string(what) + " outside its box");
}

// Scalar or per-source map keyed by sensor id.
std::vector<double> per_source(const json& v, const std::string& key, const NetworkInstance& inst,
                               std::vector<double> fallback, double scale) {
    if (v.is_number()) return std::vector<double>(inst.num_sources(), v.get<double>() * scale);
    if (!v.is_object()) throw ValidationError(key, "expected a number or a per-source map");
    for (auto it = v.begin(); it != v.end(); ++it) {
        int s = inst.sensor_index(it.key());
        if (s < 0) throw ValidationError(key + "." + it.key(), "unknown source");
        if (!it.value().is_number()) throw ValidationError(key + "." + it.key(), "expected a number");
        fallback[s] = it.value().get<double>() * scale;
    }
    return fallback;
}

}  // namespace

TradeoffParams default_params(std::size_t n) {
    TradeoffParams p;
    p.gamma.assign(n, 0.8);
    p.phi.assign(n, 0.8);
    p.x_min.assign(n, 0.1e6);
    p.x_max.assign(n, 2.0e6);
    p.R_min.assign(n, 0.9);
    p.R_max.assign(n, 1.0);
    return p;
}

void validate_params(const TradeoffParams& p) {
    for (std::size_t s = 0; s < p.size(); ++s) {
        std::string i = "[" + std::to_string(s) + "]";
        if (!(p.gamma[s] >= 0.0 && p.gamma[s] <= 1.0)) throw ValidationError("gamma" + i, "must lie in [0, 1]");
        if (!(p.phi[s] >= 0.0 && p.phi[s] <= 1.0)) throw ValidationError("phi" + i, "must lie in [0, 1]");
        if (!(p.x_min[s] > 0.0 && p.x_min[s] < p.x_max[s]))
            throw ValidationError("x_min" + i, "need 0 < x_min < x_max");
        if (!(p.R_min[s] >= 0.0 && p.R_min[s] < p.R_max[s] && p.R_max[s] <= 1.0))
            throw ValidationError("R_min" + i, "need 0 <= R_min < R_max <= 1");
    }
    if (!(p.varpi > 0.0)) throw ValidationError("varpi", "must be positive");
    if (!(p.alpha > 0.0) || p.alpha == 1.0) throw ValidationError("alpha", "need alpha > 0, alpha != 1");
    if (!(p.beta > 1.0)) throw ValidationError("beta", "need beta > 1");
    if (!(p.kappa > 0.0)) throw ValidationError("kappa", "must be positive");
}

TradeoffParams build_params(const json& doc, const NetworkInstance& inst) {
    TradeoffParams p = default_params(inst.num_sources());
    if (!doc.is_object()) throw ValidationError("params", "expected an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        auto scalar = [&]() {
            if (!v.is_number()) throw ValidationError(k, "expected a number");
            return v.get<double>();
        };
        if (k == "gamma") p.gamma = per_source(v, k, inst, p.gamma, 1.0);
        else if (k == "phi") p.phi = per_source(v, k, inst, p.phi, 1.0);
        else if (k == "x_min") p.x_min = per_source(v, k, inst, p.x_min, 1e6);
        else if (k == "x_max") p.x_max = per_source(v, k, inst, p.x_max, 1e6);
        else if (k == "R_min") p.R_min = per_source(v, k, inst, p.R_min, 1.0);
        else if (k == "R_max") p.R_max = per_source(v, k, inst, p.R_max, 1.0);
        else if (k == "varpi") p.varpi = scalar();
        else if (k == "alpha") p.alpha = scalar();
        else if (k == "beta") p.beta = scalar();
        else if (k == "kappa") p.kappa = scalar();
        else throw ValidationError(k, "unknown field");
    }
    validate_params(p);
    return p;
}

TradeoffParams load_params(const std::string& path, const NetworkInstance& inst) {
    return build_params(read_json_file(path), inst);
}

void apply_override(TradeoffParams& p, const std::string& key, double value) {
    auto fill = [&](std::vector<double>& v, double scale) { v.assign(v.size(), value * scale); };
    if (key == "gamma") fill(p.gamma, 1.0);
    else if (key == "phi") fill(p.phi, 1.0);
    else if (key == "x_min") fill(p.x_min, 1e6);
    else if (key == "x_max") fill(p.x_max, 1e6);
    else if (key == "R_min") fill(p.R_min, 1.0);
    else if (key == "R_max") fill(p.R_max, 1.0);
    else if (key == "varpi") p.varpi = value;
    else if (key == "alpha") p.alpha = value;
    else if (key == "beta") p.beta = value;
    else if (key == "kappa") p.kappa = value;
    else throw ValidationError(key, "unknown parameter");
}

double error_prob(double r, double kappa) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("code rate outside [0, 1]");
    return 0.5 * std::exp(-kappa * (1.0 - r));
}

double error_prob_deriv(double r, double kappa) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("code rate outside [0, 1]");
    return 0.5 * kappa * std::exp(-kappa * (1.0 - r));
}

double flow_reliability(const std::vector<double>& r, double kappa) {
    if (r.empty()) throw std::invalid_argument("empty route");
    double sum = 0.0;
    for (double v : r) sum += error_prob(v, kappa);
    return 1.0 - sum;
}

double flow_reliability_exact(const std::vector<double>& r, double kappa) {
    if (r.empty()) throw std::invalid_argument("empty route");
    double prod = 1.0;
    for (double v : r) prod *= 1.0 - error_prob(v, kappa);
    return prod;
}

double rate_utility(double x, const TradeoffParams& p, int s) {
    check_box(x, p.x_min[s], p.x_max[s], "rate");
    double a = 1.0 - p.alpha;
    return (std::pow(x, a) - std::pow(p.x_min[s], a)) / (std::pow(p.x_max[s], a) - std::pow(p.x_min[s], a));
}

double reliability_utility(double R, const TradeoffParams& p, int s) {
    check_box(R, p.R_min[s], p.R_max[s], "reliability");
    double a = 1.0 - p.alpha;
    return (std::pow(R, a) - std::pow(p.R_min[s], a)) / (std::pow(p.R_max[s], a) - std::pow(p.R_min[s], a));
}

double lifetime_penalty(double z, const TradeoffParams& p) {
    if (!(z > 0.0)) throw std::domain_error("normalized power must be positive");
    return p.varpi / (p.beta - 1.0) * std::pow(z, p.beta - 1.0);
}

double rate_utility_deriv(double x, const TradeoffParams& p, int s) {
    double a = 1.0 - p.alpha;
    return a * std::pow(x, -p.alpha) / (std::pow(p.x_max[s], a) - std::pow(p.x_min[s], a));
}

double reliability_utility_deriv(double R, const TradeoffParams& p, int s) {
    double a = 1.0 - p.alpha;
    return a * std::pow(R, -p.alpha) / (std::pow(p.R_max[s], a) - std::pow(p.R_min[s], a));
}

double lifetime_penalty_deriv(double z, const TradeoffParams& p) {
    return p.varpi * std::pow(z, p.beta - 2.0);
}

double combined_objective(double x, double R, double z, const TradeoffParams& p, int s) {
    double g = p.gamma[s], f = p.phi[s];
    return g * f * rate_utility(x, p, s) + g * (1.0 - f) * reliability_utility(R, p, s) -
           (1.0 - g) * lifetime_penalty(z, p);
}

double combined_objective_log(double x_log, double R, double z, const TradeoffParams& p, int s) {
    return combined_objective(std::exp(x_log), R, z, p, s);
}

double total_objective(const PrimalState& st, const TradeoffParams& p) {
    double sum = 0.0;
    for (std::size_t s = 0; s < st.x.size(); ++s)
        sum += combined_objective(st.x[s], st.R[s], st.z[s], p, static_cast<int>(s));
    return sum;
}

Gradient gradients(double x_log, double R, double z, const TradeoffParams& p, int s) {
    double g = p.gamma[s], f = p.phi[s];
    double x = std::exp(x_log);
    check_box(x, p.x_min[s], p.x_max[s], "rate");
    check_box(R, p.R_min[s], p.R_max[s], "reliability");
    if (!(z > 0.0)) throw std::domain_error("normalized power must be positive");
    return {g * f * rate_utility_deriv(x, p, s) * x, g * (1.0 - f) * reliability_utility_deriv(R, p, s),
            -(1.0 - g) * lifetime_penalty_deriv(z, p)};
}

double lifetime_utility_beta(double T, double beta) {
    if (!(T > 0.0)) throw std::domain_error("lifetime must be positive");
    if (beta < 1.0) throw std::domain_error("beta must be at least 1");
    if (beta == 1.0) return std::log(T);
    return std::pow(T, 1.0 - beta) / (1.0 - beta);
}

double ConstraintResiduals::max_capacity() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : capacity) m = std::max(m, v);
    return m;
}

double ConstraintResiduals::max_abs_reliability() const {
    double m = 0.0;
    for (double v : reliability) m = std::max(m, std::abs(v));
    return m;
}

double ConstraintResiduals::max_abs_energy() const {
    double m = 0.0;
    for (double v : energy) m = std::max(m, std::abs(v));
    return m;
}

double route_reliability(const DerivedSets& sets, const std::vector<double>& r, double kappa, int s) {
    double sum = 0.0;
    for (int pi : sets.pair_of[s]) sum += error_prob(r[pi], kappa);
    return 1.0 - sum;
}

ConstraintResiduals constraint_residuals(const NetworkInstance& inst, const DerivedSets& sets,
                                         const TradeoffParams& p, const PrimalState& st) {
    ConstraintResiduals res;
    for (const Pair& pr : sets.pairs) {
        std::size_t i = res.capacity.size();
        res.capacity.push_back(std::log(st.x[pr.source]) - std::log(st.c[i]) - std::log(st.r[i]));
    }
    for (std::size_t s = 0; s < inst.num_sources(); ++s) {
        int si = static_cast<int>(s);
        res.reliability.push_back(st.R[s] - route_reliability(sets, st.r, p.kappa, si));
        double ez = inst.initial_energy[s] * st.z[s];
        res.energy.push_back((node_power(inst, sets, st.x, si) - ez) / ez);
    }
    for (std::size_t l = 0; l < inst.num_links(); ++l) {
        double sum = 0.0;
        for (int pi : sets.pairs_on_link[l]) sum += st.c[pi];
        res.link_budget.push_back(sum - inst.links[l].capacity);
    }
    return res;
}

}  // namespace rrl
