#include "rrl/sdd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

namespace rrl {

double StepsizeSchedule::step(int t) const {
    if (kind == StepKind::Constant) return a;
    return a / (b + static_cast<double>(t));
}

double energy_step_weight(const TradeoffParams& p, double energy, double z, int s) {
    double w = std::max(1.0 - p.gamma[s], 1e-2);
    return w * p.varpi * (p.beta - 2.0) * std::pow(z, p.beta - 3.0) / (energy * energy);
}

double update_congestion_price(double lambda, double delta, double c, double r, double x) {
    return std::max(0.0, lambda - delta * (std::log(c) + std::log(r) - std::log(x)));
}

double update_reliability_price(double mu, double zeta, double route_reliability, double R) {
    return std::max(0.0, mu - zeta * (route_reliability - R));
}

double update_energy_price(double nu, double theta, double budget, double power) {
    return std::max(0.0, nu - theta * (budget - power));
}

SddContext::SddContext(const NetworkInstance& i, const DerivedSets& d, const TradeoffParams& p)
    : inst(&i), sets(&d), params(&p), zbox(z_box(i, d, p)) {}

DualState initial_dual(const SddContext& ctx) {
    const auto& sets = *ctx.sets;
    DualState d;
    d.lambda.assign(sets.pairs.size(), 1.0);
    d.mu.assign(ctx.inst->num_sources(), 1.0);
    double mean_pt = 0.0;
    for (double v : sets.link_tx_power) mean_pt += v;
    mean_pt /= static_cast<double>(sets.link_tx_power.size());
    d.nu.assign(ctx.inst->num_sources(), 1e-2 * mean_pt);
    return d;
}

PrimalState initial_primal(const SddContext& ctx) {
    const auto& p = *ctx.params;
    const auto& sets = *ctx.sets;
    const std::size_t S = ctx.inst->num_sources();
    PrimalState st;
    for (std::size_t s = 0; s < S; ++s) {
        st.x.push_back(0.5 * (p.x_min[s] + p.x_max[s]));
        st.x_log.push_back(std::log(st.x.back()));
        st.R.push_back(0.5 * (p.R_min[s] + p.R_max[s]));
        st.z.push_back(0.5 * (ctx.zbox.lo[s] + ctx.zbox.hi[s]));
    }
    for (const Pair& pr : sets.pairs) {
        st.r.push_back(0.5 * (kCodeRateFloor + 1.0));
        st.c.push_back(ctx.inst->links[pr.link].capacity /
                       static_cast<double>(sets.sources_on_link[pr.link].size()));
    }
    return st;
}

namespace {

void for_each_agent(AgentPool* pool, int n, const std::function<void(int)>& fn) {
    if (pool) {
        pool->parallel_for(n, fn);
    } else {
        for (int i = 0; i < n; ++i) fn(i);
    }
}

}  // namespace

RoundResult run_round(const SddContext& ctx, const DualState& dual, const Schedules& sch, int t,
                      AgentPool* pool, bool record_messages) {
    const NetworkInstance& inst = *ctx.inst;
    const DerivedSets& sets = *ctx.sets;
    const TradeoffParams& p = *ctx.params;
    const int S = static_cast<int>(inst.num_sources());
    const int L = static_cast<int>(inst.num_links());
    const std::size_t P = sets.pairs.size();

    RoundResult out;
    PrimalState& st = out.primal;
    st.x.assign(S, 0.0);
    st.x_log.assign(S, 0.0);
    st.R.assign(S, 0.0);
    st.z.assign(S, 0.0);
    st.r.assign(P, 0.0);
    st.c.assign(P, 0.0);
    out.dual = dual;

    // Node agents: aggregate link prices and relay energy prices, solve the
    // node subproblem.
    for_each_agent(pool, S, [&](int s) {
        NodeSubproblemInput in;
        for (int pi : sets.pair_of[s]) in.lambda_e2e += dual.lambda[pi];
        in.mu = dual.mu[s];
        in.nu_self = dual.nu[s];
        in.relay_price_sum = dual.nu[s] * sets.own_tx_power[s];
        for (int hi : sets.hops_of_source[s])
            in.relay_price_sum += dual.nu[sets.relay_hops[hi].relay] * sets.relay_hops[hi].power;
        in.energy = inst.initial_energy[s];
        in.z_lo = ctx.zbox.lo[s];
        in.z_hi = ctx.zbox.hi[s];
        NodeSolution sol = solve_node_subproblem(in, p, s);
        st.x_log[s] = sol.x_log;
        st.x[s] = std::exp(sol.x_log);
        st.R[s] = sol.R;
        st.z[s] = sol.z;
    });

    // Link agents: capacity split and per-source code rates.
    for_each_agent(pool, L, [&](int l) {
        const auto& pairs = sets.pairs_on_link[l];
        if (pairs.empty()) return;
        std::vector<double> lam;
        for (int pi : pairs) lam.push_back(dual.lambda[pi]);
        std::vector<double> c = solve_link_allocation(lam, inst.links[l].capacity);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            int pi = pairs[k];
            st.c[pi] = c[k];
            st.r[pi] = solve_code_rate(dual.lambda[pi], dual.mu[sets.pairs[pi].source], p.kappa);
        }
    });

    // Node agents: reliability price from received code rates, energy price
    // from own and relayed rates.
    const double zeta = sch.mu.step(t);
    const double nu_base = sch.nu.step(t);
    for_each_agent(pool, S, [&](int s) {
        double Rs = route_reliability(sets, st.r, p.kappa, s);
        out.dual.mu[s] = update_reliability_price(dual.mu[s], zeta, Rs, st.R[s]);
        double power = st.x[s] * sets.own_tx_power[s];
        for (int hi : sets.hops_at_relay[s])
            power += st.x[sets.relay_hops[hi].source] * sets.relay_hops[hi].power;
        double theta = nu_base;
        if (sch.nu.kind == StepKind::ScaledHarmonic)
            theta *= energy_step_weight(p, inst.initial_energy[s], st.z[s], s);
        out.dual.nu[s] = update_energy_price(dual.nu[s], theta, inst.initial_energy[s] * st.z[s], power);
    });

    // Link agents: congestion prices from the broadcast rates.
    const double delta = sch.lambda.step(t);
    for_each_agent(pool, L, [&](int l) {
        for (int pi : sets.pairs_on_link[l]) {
            out.dual.lambda[pi] =
                update_congestion_price(dual.lambda[pi], delta, st.c[pi], st.r[pi], st.x[sets.pairs[pi].source]);
        }
    });

    if (record_messages) {
        RoundMessages& m = out.messages;
        for (std::size_t pi = 0; pi < P; ++pi) {
            const Pair& pr = sets.pairs[pi];
            m.link_to_node.push_back({pr.link, pr.source, dual.lambda[pi], st.r[pi]});
            m.node_to_link.push_back({pr.source, pr.link, st.x[pr.source], dual.mu[pr.source]});
        }
        for (const RelayHop& h : sets.relay_hops) {
            m.relay_to_source.push_back({h.relay, h.source, dual.nu[h.relay]});
            m.source_to_relay.push_back({h.source, h.relay, st.x[h.source]});
        }
    }
    return out;
}

namespace {

// Flat snapshot layout for running sums.
struct Layout {
    std::size_t S, P;
    std::size_t size() const { return 3 * S + 2 * P + P + 2 * S; }
};

void pack(const Layout& lay, const PrimalState& st, const DualState& d, std::vector<double>& v) {
    v.clear();
    v.insert(v.end(), st.x.begin(), st.x.end());
    v.insert(v.end(), st.R.begin(), st.R.end());
    v.insert(v.end(), st.z.begin(), st.z.end());
    v.insert(v.end(), st.r.begin(), st.r.end());
    v.insert(v.end(), st.c.begin(), st.c.end());
    v.insert(v.end(), d.lambda.begin(), d.lambda.end());
    v.insert(v.end(), d.mu.begin(), d.mu.end());
    v.insert(v.end(), d.nu.begin(), d.nu.end());
    (void)lay;
}

void unpack(const Layout& lay, const std::vector<double>& v, PrimalState& st, DualState& d) {
    auto it = v.begin();
    auto take = [&](std::vector<double>& dst, std::size_t n) {
        dst.assign(it, it + static_cast<std::ptrdiff_t>(n));
        it += static_cast<std::ptrdiff_t>(n);
    };
    take(st.x, lay.S);
    take(st.R, lay.S);
    take(st.z, lay.S);
    take(st.r, lay.P);
    take(st.c, lay.P);
    take(d.lambda, lay.P);
    take(d.mu, lay.S);
    take(d.nu, lay.S);
    st.x_log.resize(lay.S);
    for (std::size_t s = 0; s < lay.S; ++s) st.x_log[s] = std::log(st.x[s]);
}

}  // namespace

SolveTrace sdd_solve(const NetworkInstance& inst, const DerivedSets& sets, const TradeoffParams& params,
                     const SddOptions& opt) {
    SddContext ctx(inst, sets, params);
    std::unique_ptr<AgentPool> pool;
    if (opt.threads > 1) pool = std::make_unique<AgentPool>(opt.threads);

    const Layout lay{inst.num_sources(), sets.pairs.size()};
    SolveTrace trace;
    trace.last = initial_primal(ctx);
    trace.last_dual = initial_dual(ctx);
    trace.averaged = trace.last;
    trace.averaged_dual = trace.last_dual;

    // prefix[t] holds the sum of snapshots of rounds 1..t.
    std::vector<std::vector<double>> prefix(1, std::vector<double>(lay.size(), 0.0));
    std::vector<double> snap, avg(lay.size());
    DualState dual = trace.last_dual;

    for (int t = 0; t < opt.stop.max_iters; ++t) {
        RoundResult rr = run_round(ctx, dual, opt.schedules, t, pool.get(), false);
        dual = std::move(rr.dual);
        pack(lay, rr.primal, dual, snap);
        std::vector<double> next(prefix.back());
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += snap[i];
        prefix.push_back(std::move(next));

        const int n = t + 1;
        const int h = n / 2;
        for (std::size_t i = 0; i < avg.size(); ++i)
            avg[i] = (prefix[n][i] - prefix[h][i]) / static_cast<double>(n - h);
        unpack(lay, avg, trace.averaged, trace.averaged_dual);

        ConstraintResiduals res = constraint_residuals(inst, sets, params, rr.primal);
        TraceRow row;
        row.t = n;
        row.x = rr.primal.x;
        row.R = rr.primal.R;
        row.z = rr.primal.z;
        row.lambda = dual.lambda;
        row.mu = dual.mu;
        row.nu = dual.nu;
        row.objective = total_objective(rr.primal, params);
        row.avg_objective = total_objective(trace.averaged, params);
        row.res_capacity = std::max(0.0, res.max_capacity());
        row.res_reliability = res.max_abs_reliability();
        row.res_energy = res.max_abs_energy();
        trace.rows.push_back(std::move(row));
        trace.last = std::move(rr.primal);
        trace.last_dual = dual;
        trace.iterations = n;

        const int w = opt.stop.window;
        if (opt.stop.tol > 0.0 && w > 0 && n > 2 * w) {
            double lo = trace.rows[n - 1].avg_objective, hi = lo;
            for (int k = n - 1 - w; k < n - 1; ++k) {
                lo = std::min(lo, trace.rows[k].avg_objective);
                hi = std::max(hi, trace.rows[k].avg_objective);
            }
            if (hi - lo <= opt.stop.tol * std::max(std::abs(hi), 1e-12)) {
                // One-sided: with gamma = 1 or phi = 1 the energy or
                // reliability constraint need not bind.
                ConstraintResiduals ar = constraint_residuals(inst, sets, params, trace.averaged);
                double worst = ar.max_capacity();
                for (double v : ar.reliability) worst = std::max(worst, v);
                for (double v : ar.energy) worst = std::max(worst, v);
                if (worst <= opt.stop.residual_tol) {
                    trace.status = SolveStatus::Converged;
                    break;
                }
            }
        }
    }
    return trace;
}

namespace {

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const NetworkInstance& inst, const DerivedSets& sets,
                     const SolveTrace& trace) {
    out << "t";
    for (const auto& id : inst.sensor_nodes) out << ",x_" << id;
    for (const auto& id : inst.sensor_nodes) out << ",R_" << id;
    for (const auto& id : inst.sensor_nodes) out << ",T_" << id;
    for (const Pair& pr : sets.pairs) out << ",lambda_" << inst.links[pr.link].id << '_' << inst.sensor_nodes[pr.source];
    for (const auto& id : inst.sensor_nodes) out << ",mu_" << id;
    for (const auto& id : inst.sensor_nodes) out << ",nu_" << id;
    out << ",objective,avg_objective,res_capacity,res_reliability,res_energy\n";
    for (const TraceRow& row : trace.rows) {
        out << row.t;
        for (double v : row.x) put(out, v);
        for (double v : row.R) put(out, v);
        for (double v : row.z) put(out, 1.0 / v);
        for (double v : row.lambda) put(out, v);
        for (double v : row.mu) put(out, v);
        for (double v : row.nu) put(out, v);
        put(out, row.objective);
        put(out, row.avg_objective);
        put(out, row.res_capacity);
        put(out, row.res_reliability);
        put(out, row.res_energy);
        out << '\n';
    }
}

struct AgentPool::Impl {
    std::vector<std::thread> workers;
    std::mutex m;
    std::condition_variable cv_work, cv_done;
    const std::function<void(int)>* fn = nullptr;
    int n = 0;
    std::atomic<int> next{0};
    int active = 0;
    std::uint64_t generation = 0;
    bool stop = false;

    void run_items() {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) (*fn)(i);
    }

    void worker() {
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock<std::mutex> lk(m);
            cv_work.wait(lk, [&] { return stop || generation != seen; });
            if (stop) return;
            seen = generation;
            lk.unlock();
            run_items();
            lk.lock();
            if (--active == 0) cv_done.notify_one();
        }
    }
};

AgentPool::AgentPool(int threads) : impl_(std::make_unique<Impl>()) {
    for (int i = 0; i < std::max(1, threads - 1); ++i) impl_->workers.emplace_back([this] { impl_->worker(); });
}

AgentPool::~AgentPool() {
    {
        std::lock_guard<std::mutex> lk(impl_->m);
        impl_->stop = true;
    }
    impl_->cv_work.notify_all();
    for (auto& w : impl_->workers) w.join();
}

void AgentPool::parallel_for(int n, const std::function<void(int)>& fn) {
    Impl& im = *impl_;
    {
        std::lock_guard<std::mutex> lk(im.m);
        im.fn = &fn;
        im.n = n;
        im.next = 0;
        im.active = static_cast<int>(im.workers.size());
        ++im.generation;
    }
    im.cv_work.notify_all();
    im.run_items();
    std::unique_lock<std::mutex> lk(im.m);
    im.cv_done.wait(lk, [&] { return im.active == 0; });
}

}  // namespace rrl
