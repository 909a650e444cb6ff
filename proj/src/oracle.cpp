#include "rrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "rrl/subproblems.hpp"

namespace rrl {

PrimalState feasibility_witness(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p) {
    const std::size_t S = inst.num_sources();
    PrimalState st;
    st.r.assign(sets.pairs.size(), 1.0);
    st.c.assign(sets.pairs.size(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        st.x.push_back(p.x_min[s]);
        st.x_log.push_back(std::log(p.x_min[s]));
        double budget = (1.0 - p.R_min[s]) / static_cast<double>(sets.pair_of[s].size());
        double r = std::min(1.0, 1.0 + std::log(2.0 * budget) / p.kappa);
        if (!(r > kCodeRateFloor))
            throw InfeasibleError("reliability floor of source " + inst.sensor_nodes[s] + " is unreachable");
        for (int pi : sets.pair_of[s]) st.r[pi] = r;
        st.R.push_back(std::min(p.R_max[s], route_reliability(sets, st.r, p.kappa, static_cast<int>(s))));
    }
    for (std::size_t l = 0; l < inst.num_links(); ++l) {
        double load = 0.0;
        for (int pi : sets.pairs_on_link[l]) load += st.x[sets.pairs[pi].source] / st.r[pi];
        if (load > inst.links[l].capacity)
            throw InfeasibleError("link " + inst.links[l].id + " cannot carry the minimum rates");
        for (int pi : sets.pairs_on_link[l]) st.c[pi] = st.x[sets.pairs[pi].source] / st.r[pi];
    }
    for (std::size_t s = 0; s < S; ++s)
        st.z.push_back(node_power(inst, sets, st.x, static_cast<int>(s)) / inst.initial_energy[s]);
    return st;
}

namespace {

// Centralized reformulation over v = (x', R, r); z = p(x)/e and c = x/r are
// eliminated. Constraints: link load / C - 1 <= 0 and R - (1 - sum E) <= 0.
struct Problem {
    const NetworkInstance& inst;
    const DerivedSets& sets;
    const TradeoffParams& p;
    std::size_t S, P, n, m;
    std::vector<double> lo, hi;
    std::vector<std::vector<double>> A;  // A[node][source]: J/bit drawn at node per bit of source

    Problem(const NetworkInstance& i, const DerivedSets& d, const TradeoffParams& pp)
        : inst(i), sets(d), p(pp), S(i.num_sources()), P(d.pairs.size()) {
        n = 2 * S + P;
        m = i.num_links() + S;
        for (std::size_t s = 0; s < S; ++s) {
            lo.push_back(std::log(p.x_min[s]));
            hi.push_back(std::log(p.x_max[s]));
        }
        for (std::size_t s = 0; s < S; ++s) {
            lo.push_back(p.R_min[s]);
            hi.push_back(p.R_max[s]);
        }
        for (std::size_t k = 0; k < P; ++k) {
            lo.push_back(kCodeRateFloor);
            hi.push_back(1.0);
        }
        A.assign(S, std::vector<double>(S, 0.0));
        for (std::size_t s = 0; s < S; ++s) A[s][s] = d.own_tx_power[s];
        for (const RelayHop& h : d.relay_hops) A[h.relay][h.source] += h.power;
    }

    void project(std::vector<double>& v) const {
        for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    }

    std::vector<double> rates(const std::vector<double>& v) const {
        std::vector<double> x(S);
        for (std::size_t s = 0; s < S; ++s) x[s] = std::exp(v[s]);
        return x;
    }

    double power(const std::vector<double>& x, std::size_t node) const {
        double sum = 0.0;
        for (std::size_t s = 0; s < S; ++s) sum += A[node][s] * x[s];
        return sum;
    }

    double objective(const std::vector<double>& v) const {
        auto x = rates(v);
        double f = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double z = power(x, s) / inst.initial_energy[s];
            f += combined_objective(x[s], v[S + s], z, p, static_cast<int>(s));
        }
        return f;
    }

    void objective_grad(const std::vector<double>& v, std::vector<double>& g) const {
        auto x = rates(v);
        g.assign(n, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            int si = static_cast<int>(s);
            g[s] += p.gamma[s] * p.phi[s] * rate_utility_deriv(x[s], p, si) * x[s];
            g[S + s] = p.gamma[s] * (1.0 - p.phi[s]) * reliability_utility_deriv(v[S + s], p, si);
        }
        for (std::size_t node = 0; node < S; ++node) {
            double e = inst.initial_energy[node];
            double coef = (1.0 - p.gamma[node]) * lifetime_penalty_deriv(power(x, node) / e, p) / e;
            if (coef == 0.0) continue;
            for (std::size_t s = 0; s < S; ++s) g[s] -= coef * A[node][s] * x[s];
        }
    }

    void constraints(const std::vector<double>& v, std::vector<double>& c) const {
        auto x = rates(v);
        c.assign(m, 0.0);
        for (std::size_t l = 0; l < inst.num_links(); ++l) {
            if (sets.pairs_on_link[l].empty()) {
                c[l] = -1.0;
                continue;
            }
            double load = 0.0;
            for (int pi : sets.pairs_on_link[l]) load += x[sets.pairs[pi].source] / v[2 * S + pi];
            c[l] = load / inst.links[l].capacity - 1.0;
        }
        for (std::size_t s = 0; s < S; ++s) {
            double sumE = 0.0;
            for (int pi : sets.pair_of[s]) sumE += error_prob(v[2 * S + pi], p.kappa);
            c[inst.num_links() + s] = v[S + s] - 1.0 + sumE;
        }
    }

    // g += sum_i w_i grad c_i
    void add_constraint_grads(const std::vector<double>& v, const std::vector<double>& w,
                              std::vector<double>& g) const {
        auto x = rates(v);
        for (std::size_t l = 0; l < inst.num_links(); ++l) {
            if (w[l] == 0.0) continue;
            double C = inst.links[l].capacity;
            for (int pi : sets.pairs_on_link[l]) {
                std::size_t s = static_cast<std::size_t>(sets.pairs[pi].source);
                double r = v[2 * S + pi];
                g[s] += w[l] * x[s] / (r * C);
                g[2 * S + pi] -= w[l] * x[s] / (r * r * C);
            }
        }
        for (std::size_t s = 0; s < S; ++s) {
            double ws = w[inst.num_links() + s];
            if (ws == 0.0) continue;
            g[S + s] += ws;
            for (int pi : sets.pair_of[s]) g[2 * S + pi] += ws * error_prob_deriv(v[2 * S + pi], p.kappa);
        }
    }
};

struct Augmented {
    const Problem& pr;
    const std::vector<double>& y;
    double rho;
    mutable std::vector<double> cbuf, wbuf;

    double value(const std::vector<double>& v) const {
        pr.constraints(v, cbuf);
        double pen = 0.0;
        for (std::size_t i = 0; i < pr.m; ++i) {
            double t = std::max(0.0, y[i] + rho * cbuf[i]);
            pen += (t * t - y[i] * y[i]) / (2.0 * rho);
        }
        return -pr.objective(v) + pen;
    }

    void grad(const std::vector<double>& v, std::vector<double>& g) const {
        pr.objective_grad(v, g);
        for (double& gi : g) gi = -gi;
        pr.constraints(v, cbuf);
        wbuf.assign(pr.m, 0.0);
        for (std::size_t i = 0; i < pr.m; ++i) wbuf[i] = std::max(0.0, y[i] + rho * cbuf[i]);
        pr.add_constraint_grads(v, wbuf, g);
    }

    // -grad W + sum w_i grad c_i with the weights held fixed. Differencing
    // it gives the smooth part of the Hessian.
    void grad_fixed_weights(const std::vector<double>& v, const std::vector<double>& w,
                            std::vector<double>& g) const {
        pr.objective_grad(v, g);
        for (double& gi : g) gi = -gi;
        pr.add_constraint_grads(v, w, g);
    }
};

double projected_grad_norm(const Problem& pr, const std::vector<double>& v, const std::vector<double>& g) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < pr.n; ++i)
        nrm = std::max(nrm, std::abs(std::clamp(v[i] - g[i], pr.lo[i], pr.hi[i]) - v[i]));
    return nrm;
}

// Projected Newton on the augmented Lagrangian. Variables at a bound with an
// outward gradient are held and moved along -g; the free ones take a Newton
// step on a generalized Hessian: central differences of the gradient with the
// penalty weights frozen, plus rho J^T J over the switched-on constraints.
// If that step makes little progress the model is rebuilt with near-active
// constraints switched on too, so it sees the penalty a long step runs into.
struct NewtonWorkspace {
    std::vector<double> gp, gm, vt, cons, w;
    std::vector<std::vector<double>> J;
};

bool newton_direction(const Problem& pr, const Augmented& F, const std::vector<double>& v,
                      const std::vector<double>& g, const std::vector<int>& free_idx, bool near_active,
                      NewtonWorkspace& ws, std::vector<double>& d) {
    const std::size_t n = pr.n, k = free_idx.size();
    if (k == 0) return false;
    pr.constraints(v, ws.cons);
    ws.w.assign(pr.m, 0.0);
    ws.J.assign(pr.m, std::vector<double>());
    for (std::size_t i = 0; i < pr.m; ++i) {
        ws.w[i] = std::max(0.0, F.y[i] + F.rho * ws.cons[i]);
        if (ws.w[i] > 0.0 || (near_active && ws.cons[i] > -1e-3)) {
            std::vector<double> unit(pr.m, 0.0);
            unit[i] = 1.0;
            ws.J[i].assign(n, 0.0);
            pr.add_constraint_grads(v, unit, ws.J[i]);
        }
    }

    Eigen::MatrixXd H(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        std::size_t i = static_cast<std::size_t>(free_idx[a]);
        double h = 1e-6 * std::max(1.0, std::abs(v[i]));
        ws.vt = v;
        ws.vt[i] = v[i] + h;
        F.grad_fixed_weights(ws.vt, ws.w, ws.gp);
        ws.vt[i] = v[i] - h;
        F.grad_fixed_weights(ws.vt, ws.w, ws.gm);
        for (std::size_t b = 0; b < k; ++b) {
            std::size_t j = static_cast<std::size_t>(free_idx[b]);
            H(b, a) = (ws.gp[j] - ws.gm[j]) / (2.0 * h);
        }
    }
    H = 0.5 * (H + H.transpose()).eval();
    for (const auto& Ji : ws.J) {
        if (Ji.empty()) continue;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) H(a, b) += F.rho * Ji[free_idx[a]] * Ji[free_idx[b]];
    }
    Eigen::VectorXd gf(k);
    for (std::size_t a = 0; a < k; ++a) gf(a) = g[free_idx[a]];

    double shift = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd Hs = H;
        Hs.diagonal().array() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(Hs);
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd df = llt.solve(-gf);
            if (df.allFinite() && df.dot(gf) < 0.0) {
                for (std::size_t a = 0; a < k; ++a) d[free_idx[a]] = df(a);
                return true;
            }
        }
        shift = shift == 0.0 ? 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff()) : shift * 100.0;
    }
    return false;
}

// Projected Armijo arc search along d; returns the accepted step or 0.
double arc_search(const Problem& pr, const Augmented& F, const std::vector<double>& v, const std::vector<double>& g,
                  double f, const std::vector<double>& d, std::vector<double>& vn, double& fn) {
    double step = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < pr.n; ++i) vn[i] = std::clamp(v[i] + step * d[i], pr.lo[i], pr.hi[i]);
        fn = F.value(vn);
        double decrease = 0.0;
        for (std::size_t i = 0; i < pr.n; ++i) decrease += g[i] * (v[i] - vn[i]);
        if (fn <= f - 1e-4 * decrease) return step;
        step *= 0.5;
    }
    return 0.0;
}

int projected_newton(const Problem& pr, const Augmented& F, std::vector<double>& v, double tol, int max_iter,
                     double& final_norm, bool& converged) {
    const std::size_t n = pr.n;
    NewtonWorkspace ws;
    std::vector<double> g, d(n), d2(n), vn(n), vn2(n);
    pr.project(v);
    double f = F.value(v);
    F.grad(v, g);
    double f_mark = f;
    double last_dec = std::numeric_limits<double>::infinity();
    converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        final_norm = projected_grad_norm(pr, v, g);
        if (final_norm <= tol) {
            converged = true;
            break;
        }

        const double eps_act = std::min(1e-3, final_norm);
        std::vector<int> free_idx;
        std::vector<bool> active(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            bool at_lo = v[i] <= pr.lo[i] + eps_act && g[i] > 0.0;
            bool at_hi = v[i] >= pr.hi[i] - eps_act && g[i] < 0.0;
            active[i] = at_lo || at_hi;
            if (!active[i]) free_idx.push_back(static_cast<int>(i));
        }

        std::fill(d.begin(), d.end(), 0.0);
        bool newton_ok = newton_direction(pr, F, v, g, free_idx, false, ws, d);
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] || !newton_ok) d[i] = -g[i];

        // Stationarity in the Newton metric: the decrement on the free set plus
        // the projected gradient of the held variables. The plain projected
        // gradient is not scale invariant and stays large along stiff penalty
        // directions long after F has stopped changing.
        if (newton_ok) {
            double dec = 0.0, act = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!active[i])
                    dec -= g[i] * d[i];
                else
                    act = std::max(act, std::abs(std::clamp(v[i] - g[i], pr.lo[i], pr.hi[i]) - v[i]));
            }
            last_dec = act <= tol ? dec : std::numeric_limits<double>::infinity();
            if (dec <= std::max(tol * tol, 1e-14 * (1.0 + std::abs(f))) && act <= tol) {
                final_norm = std::max(std::sqrt(std::max(dec, 0.0)), act);
                converged = true;
                break;
            }
        }

        double fn = f;
        double step = arc_search(pr, F, v, g, f, d, vn, fn);
        if (newton_ok && step < 0.1) {
            std::fill(d2.begin(), d2.end(), 0.0);
            if (newton_direction(pr, F, v, g, free_idx, true, ws, d2)) {
                for (std::size_t i = 0; i < n; ++i)
                    if (active[i]) d2[i] = -g[i];
                double fn2 = f;
                double step2 = arc_search(pr, F, v, g, f, d2, vn2, fn2);
                if (step2 > 0.0 && (step == 0.0 || fn2 < fn)) {
                    vn.swap(vn2);
                    fn = fn2;
                    step = step2;
                }
            }
        }
        if (step == 0.0) break;
        v.swap(vn);
        f = fn;
        if (it % 50 == 49) {
            // Flat valleys (code rates on links with negligible error
            // probability) can leave the decrement just above its floor.
            // Accept the point when the model predicts less than tol of
            // further decrease.
            if (f_mark - f <= 1e-10 * (1.0 + std::abs(f))) {
                converged = last_dec <= tol;
                if (converged) final_norm = std::sqrt(std::max(last_dec, 0.0));
                break;
            }
            f_mark = f;
        }
        F.grad(v, g);
    }
    if (!converged) final_norm = projected_grad_norm(pr, v, g);
    return it;
}

}  // namespace

OracleSolution oracle_solve(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p,
                            const OracleOptions& opt) {
    PrimalState witness = feasibility_witness(inst, sets, p);
    Problem pr(inst, sets, p);
    const std::size_t S = pr.S, L = inst.num_links();

    std::vector<double> v(pr.n);
    if (opt.seed == 0) {
        for (std::size_t s = 0; s < S; ++s) {
            v[s] = witness.x_log[s];
            v[S + s] = witness.R[s];
        }
        for (std::size_t k = 0; k < pr.P; ++k) v[2 * S + k] = witness.r[k];
    } else {
        std::mt19937_64 rng(opt.seed);
        for (std::size_t i = 0; i < pr.n; ++i) {
            double lo = i >= 2 * S ? 0.5 : pr.lo[i];
            v[i] = std::uniform_real_distribution<double>(lo, pr.hi[i])(rng);
        }
    }

    std::vector<double> y(pr.m, 0.0), c;
    double rho = 10.0;
    double prev_violation = std::numeric_limits<double>::infinity();
    OracleSolution sol;
    sol.status = OracleStatus::Stalled;
    double gnorm = 0.0;
    bool inner_ok = false;
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        Augmented F{pr, y, rho, {}, {}};
        double inner_tol = std::max(opt.tol, std::min(1e-3, 0.1 * prev_violation));
        int its = projected_newton(pr, F, v, inner_tol, opt.max_inner, gnorm, inner_ok);
        sol.inner_iterations += its;
        pr.constraints(v, c);
        double violation = 0.0;
        for (std::size_t i = 0; i < pr.m; ++i) {
            violation = std::max(violation, std::abs(std::max(c[i], -y[i] / rho)));
            y[i] = std::max(0.0, y[i] + rho * c[i]);
        }
        sol.outer_iterations = outer + 1;
        if (violation <= opt.tol && inner_ok && inner_tol <= opt.tol) {
            sol.status = OracleStatus::Optimal;
            prev_violation = violation;
            break;
        }
        if (violation > opt.tol && violation > 0.25 * prev_violation) rho = std::min(rho * 10.0, 1e8);
        prev_violation = violation;
    }
    sol.grad_norm = gnorm;
    sol.max_violation = prev_violation;

    auto x = pr.rates(v);
    PrimalState& st = sol.primal;
    st.x = x;
    st.x_log.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(S));
    st.R.assign(v.begin() + static_cast<std::ptrdiff_t>(S), v.begin() + static_cast<std::ptrdiff_t>(2 * S));
    st.r.assign(v.begin() + static_cast<std::ptrdiff_t>(2 * S), v.end());
    st.c.assign(pr.P, 0.0);
    for (std::size_t k = 0; k < pr.P; ++k) st.c[k] = x[sets.pairs[k].source] / st.r[k];
    for (std::size_t s = 0; s < S; ++s) st.z.push_back(pr.power(x, s) / inst.initial_energy[s]);
    sol.value = total_objective(st, p);

    DualState& d = sol.multipliers;
    d.lambda.assign(pr.P, 0.0);
    for (std::size_t l = 0; l < L; ++l)
        for (int pi : sets.pairs_on_link[l]) d.lambda[pi] = y[l] * st.c[pi] / inst.links[l].capacity;
    for (std::size_t s = 0; s < S; ++s) {
        d.mu.push_back(y[L + s]);
        d.nu.push_back((1.0 - p.gamma[s]) * lifetime_penalty_deriv(st.z[s], p) / inst.initial_energy[s]);
    }
    sol.upper_bound = dual_function(inst, sets, p, d).value;
    return sol;
}

DualEvaluation dual_function(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p,
                             const DualState& dual) {
    const std::size_t S = inst.num_sources();
    ZBox box = z_box(inst, sets, p);
    DualEvaluation ev{0.0, {}};
    PrimalState& st = ev.argmax;
    st.r.assign(sets.pairs.size(), 0.0);
    st.c.assign(sets.pairs.size(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        int si = static_cast<int>(s);
        NodeSubproblemInput in;
        for (int pi : sets.pair_of[s]) in.lambda_e2e += dual.lambda[pi];
        in.mu = dual.mu[s];
        in.nu_self = dual.nu[s];
        in.relay_price_sum = dual.nu[s] * sets.own_tx_power[s];
        for (int hi : sets.hops_of_source[s])
            in.relay_price_sum += dual.nu[sets.relay_hops[hi].relay] * sets.relay_hops[hi].power;
        in.energy = inst.initial_energy[s];
        in.z_lo = box.lo[s];
        in.z_hi = box.hi[s];
        NodeSolution ns = solve_node_subproblem(in, p, si);
        ev.value += node_subproblem_value(in, p, si, ns) + dual.mu[s];
        st.x_log.push_back(ns.x_log);
        st.x.push_back(std::exp(ns.x_log));
        st.R.push_back(ns.R);
        st.z.push_back(ns.z);
    }
    for (std::size_t l = 0; l < inst.num_links(); ++l) {
        const auto& pairs = sets.pairs_on_link[l];
        if (pairs.empty()) continue;
        std::vector<double> lam;
        for (int pi : pairs) lam.push_back(dual.lambda[pi]);
        std::vector<double> c = solve_link_allocation(lam, inst.links[l].capacity);
        ev.value += link_allocation_value(lam, c);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            int pi = pairs[k];
            double mu = dual.mu[sets.pairs[pi].source];
            st.c[pi] = c[k];
            st.r[pi] = solve_code_rate(dual.lambda[pi], mu, p.kappa);
            ev.value += code_rate_value(dual.lambda[pi], mu, p.kappa, st.r[pi]);
        }
    }
    return ev;
}

double duality_gap(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& p,
                   const PrimalState& primal, const DualState& dual, double feas_tol) {
    ConstraintResiduals res = constraint_residuals(inst, sets, p, primal);
    double worst = std::max({res.max_capacity(), 0.0});
    for (double v : res.reliability) worst = std::max(worst, v);
    for (double v : res.energy) worst = std::max(worst, v);
    for (std::size_t l = 0; l < res.link_budget.size(); ++l)
        worst = std::max(worst, res.link_budget[l] / inst.links[l].capacity);
    if (worst > feas_tol)
        throw InfeasibleError("primal violates a coupling constraint by " + std::to_string(worst) +
                              " (capacity " + std::to_string(res.max_capacity()) + ", reliability " +
                              std::to_string(res.max_abs_reliability()) + ", energy " +
                              std::to_string(res.max_abs_energy()) + ")");
    return dual_function(inst, sets, p, dual).value - total_objective(primal, p);
}

namespace {

// Maximizes score(x) over rate vectors with sum x = total and x in the box, by
// a grid over the first S-1 coordinates refined twice around the incumbent.
template <class Score>
std::vector<double> grid_maximize(const TradeoffParams& p, std::size_t S, double total, Score&& score) {
    const int N = 200;
    std::vector<double> lo(S - 1), hi(S - 1);
    for (std::size_t i = 0; i + 1 < S; ++i) {
        lo[i] = p.x_min[i];
        hi[i] = p.x_max[i];
    }
    std::vector<double> best;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<int> idx(S - 1, 0);
        std::vector<double> x(S);
        for (;;) {
            double rest = total;
            for (std::size_t i = 0; i + 1 < S; ++i) {
                x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / N;
                rest -= x[i];
            }
            x[S - 1] = rest;
            bool ok = true;
            for (std::size_t i = 0; i < S; ++i)
                if (x[i] < p.x_min[i] - 1e-9 || x[i] > p.x_max[i] + 1e-9) ok = false;
            if (ok) {
                x[S - 1] = std::clamp(x[S - 1], p.x_min[S - 1], p.x_max[S - 1]);
                double val = score(x);
                if (val > best_val) {
                    best_val = val;
                    best = x;
                }
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] > N) idx[k++] = 0;
            if (k == idx.size()) break;
        }
        if (best.empty()) throw InfeasibleError("aggregate rate cannot be split within the rate box");
        for (std::size_t i = 0; i + 1 < S; ++i) {
            double cell = (hi[i] - lo[i]) / N;
            double c = best[i];
            lo[i] = std::max(p.x_min[i], c - 2.0 * cell);
            hi[i] = std::min(p.x_max[i], c + 2.0 * cell);
        }
    }
    return best;
}

}  // namespace

std::vector<BetaComparisonRow> network_lifetime_exact_vs_beta(const NetworkInstance& inst,
                                                              const DerivedSets& sets,
                                                              const TradeoffParams& p,
                                                              const std::vector<double>& betas,
                                                              double total_rate) {
    const std::size_t S = inst.num_sources();
    if (S > 3) throw std::invalid_argument("instance too large for grid");
    auto lifetimes = [&](const std::vector<double>& x) {
        std::vector<double> T(S);
        for (std::size_t s = 0; s < S; ++s)
            T[s] = node_lifetime(inst, node_power(inst, sets, x, static_cast<int>(s)), static_cast<int>(s));
        return T;
    };
    auto min_lifetime = [&](const std::vector<double>& x) {
        auto T = lifetimes(x);
        return *std::min_element(T.begin(), T.end());
    };
    std::vector<double> maxmin_x;
    if (S == 1) maxmin_x = {total_rate};
    else maxmin_x = grid_maximize(p, S, total_rate, min_lifetime);
    double maxmin = min_lifetime(maxmin_x);

    std::vector<BetaComparisonRow> rows;
    for (double beta : betas) {
        std::vector<double> x;
        if (S == 1) {
            x = {total_rate};
        } else {
            // Scale by a reference lifetime so T^(1-beta) stays in range.
            double ref = maxmin;
            x = grid_maximize(p, S, total_rate, [&](const std::vector<double>& xx) {
                double sum = 0.0;
                for (double T : lifetimes(xx)) sum += lifetime_utility_beta(T / ref, beta);
                return sum;
            });
        }
        BetaComparisonRow row;
        row.beta = beta;
        row.surrogate_rates = x;
        row.surrogate_min_lifetime = min_lifetime(x);
        row.maxmin_lifetime = maxmin;
        row.gap = (maxmin - row.surrogate_min_lifetime) / maxmin;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rrl
