#include "rrl/subproblems.hpp"

#include <algorithm>
#include <numeric>

namespace rrl {

ZBox z_box(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p) {
    ZBox box;
    for (std::size_t s = 0; s < inst.num_sources(); ++s) {
        int si = static_cast<int>(s);
        box.lo.push_back(node_power(inst, sets, p.x_min, si) / inst.initial_energy[s]);
        box.hi.push_back(node_power(inst, sets, p.x_max, si) / inst.initial_energy[s]);
    }
    return box;
}

NodeSolution solve_node_subproblem(const NodeSubproblemInput& in, const TradeoffParams& p, int s) {
    const double g = p.gamma[s], f = p.phi[s];
    NodeSolution sol;

    const double wx = g * f;
    auto dx = [&](double xl) {
        double x = std::exp(xl);
        return wx * rate_utility_deriv(x, p, s) * x - in.lambda_e2e - in.relay_price_sum * x;
    };
    sol.x_log = maximize_concave_1d(dx, std::log(p.x_min[s]), std::log(p.x_max[s]), kSolverTol);

    const double wr = g * (1.0 - f);
    auto dr = [&](double R) { return wr * reliability_utility_deriv(R, p, s) - in.mu; };
    sol.R = maximize_concave_1d(dr, p.R_min[s], p.R_max[s], kSolverTol);

    if (g >= 1.0) {
        sol.z = in.z_hi;
    } else {
        auto dz = [&](double z) {
            return in.nu_self * in.energy - (1.0 - g) * lifetime_penalty_deriv(z, p);
        };
        sol.z = maximize_concave_1d(dz, in.z_lo, in.z_hi, kSolverTol * in.z_hi);
    }
    return sol;
}

double node_subproblem_value(const NodeSubproblemInput& in, const TradeoffParams& p, int s,
                             const NodeSolution& sol) {
    return combined_objective_log(sol.x_log, sol.R, sol.z, p, s) - in.lambda_e2e * sol.x_log -
           in.mu * sol.R + in.nu_self * in.energy * sol.z - in.relay_price_sum * std::exp(sol.x_log);
}

std::vector<double> solve_link_allocation(const std::vector<double>& lambda, double capacity) {
    const std::size_t n = lambda.size();
    std::vector<double> c(n, 0.0);
    if (n == 0) return c;
    double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    if (!(total > 0.0)) {
        c.assign(n, capacity / static_cast<double>(n));
        return c;
    }
    std::size_t zeros = 0;
    for (double v : lambda) zeros += v > 0.0 ? 0 : 1;
    double budget = capacity - static_cast<double>(zeros) * kCapacityFloor;
    for (std::size_t i = 0; i < n; ++i) c[i] = lambda[i] > 0.0 ? lambda[i] * budget / total : kCapacityFloor;
    // Rounding can push the sum a few ulps past C; take the excess off the largest share.
    auto largest = std::max_element(c.begin(), c.end());
    for (int k = 0; k < 4; ++k) {
        double excess = std::accumulate(c.begin(), c.end(), 0.0) - capacity;
        if (excess <= 0.0) break;
        *largest = std::nextafter(*largest - excess, 0.0);
    }
    return c;
}

double link_allocation_value(const std::vector<double>& lambda, const std::vector<double>& c) {
    double v = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) v += lambda[i] * std::log(c[i]);
    return v;
}

double solve_code_rate(double lambda_ls, double mu_s, double kappa) {
    if (lambda_ls <= 0.0 && mu_s <= 0.0) return 1.0;
    auto dr = [&](double r) { return lambda_ls / r - mu_s * 0.5 * kappa * std::exp(-kappa * (1.0 - r)); };
    return maximize_concave_1d(dr, kCodeRateFloor, 1.0, kSolverTol);
}

double code_rate_value(double lambda_ls, double mu_s, double kappa, double r) {
    return lambda_ls * std::log(r) - mu_s * error_prob(r, kappa);
}

}  // namespace rrl
