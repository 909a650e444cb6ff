#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rrl/model.hpp"
#include "rrl/objective.hpp"

namespace rrl {

inline constexpr double kCapacityFloor = 1e-9;  // epsilon_c, bit/s
inline constexpr double kCodeRateFloor = 1e-9;  // epsilon_r
inline constexpr double kSolverTol = 1e-10;

// Maximizes a concave function given its derivative `df` by bisection on the
// derivative sign. Returns `lo` when df(lo) <= 0 and `hi` when df(hi) >= 0.
template <class DF>
double maximize_concave_1d(DF&& df, double lo, double hi, double tol) {
    if (!(lo < hi)) throw std::invalid_argument("maximize_concave_1d: need lo < hi");
    if (!(tol > 0.0)) throw std::invalid_argument("maximize_concave_1d: need tol > 0");
    if (df(lo) <= 0.0) return lo;
    if (df(hi) >= 0.0) return hi;
    for (int i = 0; i < 400 && hi - lo > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (df(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct NodeSubproblemInput {
    double lambda_e2e = 0.0;       // lambda^s
    double mu = 0.0;               // mu_s
    double nu_self = 0.0;          // nu_s
    double relay_price_sum = 0.0;  // K_s
    double energy = 0.0;           // e_s, J
    double z_lo = 0.0;
    double z_hi = 0.0;
};

struct NodeSolution {
    double x_log;
    double R;
    double z;
};

struct ZBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

// z_lo = p_s(all x_min)/e_s and z_hi = p_s(all x_max)/e_s.
ZBox z_box(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p);

NodeSolution solve_node_subproblem(const NodeSubproblemInput& in, const TradeoffParams& p, int s);

// Value of the node Lagrangian term at a candidate point.
double node_subproblem_value(const NodeSubproblemInput& in, const TradeoffParams& p, int s,
                             const NodeSolution& sol);

// Proportional split of C over the link's sources; zero-price sources get the
// floor and the rest of the budget is split in proportion to price.
std::vector<double> solve_link_allocation(const std::vector<double>& lambda_on_link, double capacity);
double link_allocation_value(const std::vector<double>& lambda_on_link, const std::vector<double>& c);

double solve_code_rate(double lambda_ls, double mu_s, double kappa);
double code_rate_value(double lambda_ls, double mu_s, double kappa, double r);

}  // namespace rrl
