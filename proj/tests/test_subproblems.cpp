#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "common.hpp"
#include "grid_oracles.hpp"
#include "rrl/subproblems.hpp"

using namespace rrl;

namespace {

struct Canonical {
    NetworkInstance inst = load_instance(testutil::data("canonical_instance.json"));
    DerivedSets sets = derive_sets(inst);
    TradeoffParams params = default_params(6);
    ZBox box = z_box(inst, sets, params);
};

}  // namespace

TEST_CASE("1-D concave maximizer") {
    CHECK(maximize_concave_1d([](double t) { return -2.0 * (t - 0.3); }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(0.3).epsilon(1e-10));
    CHECK(maximize_concave_1d([](double) { return 1.0; }, 0.0, 1.0, 1e-12) == 1.0);
    CHECK(maximize_concave_1d([](double) { return -1.0; }, 0.0, 1.0, 1e-12) == 0.0);
    CHECK_THROWS(maximize_concave_1d([](double) { return 0.0; }, 1.0, 0.0, 1e-12));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        // f = -(t - c)^4 - a (t - c)^2 + b t is concave for a >= 0.
        double c = u(rng), a = std::abs(u(rng)), b = 0.5 * u(rng);
        auto f = [&](double t) { return -std::pow(t - c, 4) - a * (t - c) * (t - c) + b * t; };
        auto df = [&](double t) { return -4.0 * std::pow(t - c, 3) - 2.0 * a * (t - c) + b; };
        double best = -1.0, fbest = -INFINITY;
        for (int i = 0; i <= 1000000; ++i) {
            double t = i * 1e-6;
            if (f(t) > fbest) fbest = f(t), best = t;
        }
        CHECK(std::abs(maximize_concave_1d(df, 0.0, 1.0, 1e-12) - best) <= 1e-4);
    }
}

TEST_CASE("node subproblem boundary rules") {
    Canonical c;
    NodeSubproblemInput in{1.0, 0.0, 1e-3, 1e-9, 2000.0, c.box.lo[5], c.box.hi[5]};
    NodeSolution sol = solve_node_subproblem(in, c.params, 5);
    CHECK(sol.R == c.params.R_max[5]);

    // z part with nu e = (1 - gamma) varpi has its stationary point at z = 1.
    TradeoffParams p = c.params;
    NodeSubproblemInput unit = in;
    unit.energy = 1.0;
    unit.nu_self = (1.0 - p.gamma[5]) * p.varpi;
    unit.z_lo = 0.5;
    unit.z_hi = 2.0;
    CHECK(solve_node_subproblem(unit, p, 5).z == doctest::Approx(1.0).epsilon(1e-9));
    unit.z_lo = 1.5;
    CHECK(solve_node_subproblem(unit, p, 5).z == doctest::Approx(1.5).epsilon(1e-12));

    // gamma = 1: no lifetime term; the energy price pushes z to the top of its box.
    p.gamma[5] = 1.0;
    CHECK(solve_node_subproblem(in, p, 5).z == in.z_hi);
}

TEST_CASE("node subproblem against grid search") {
    Canonical c;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int worse = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int s = static_cast<int>(trial % 6);
        TradeoffParams p = c.params;
        p.gamma[static_cast<std::size_t>(s)] = 0.05 + 0.9 * u(rng);
        p.phi[static_cast<std::size_t>(s)] = 0.05 + 0.9 * u(rng);
        NodeSubproblemInput in = gridref::random_node_input(rng, p, s, c.inst.initial_energy[static_cast<std::size_t>(s)],
                                                            c.box.lo[static_cast<std::size_t>(s)],
                                                            c.box.hi[static_cast<std::size_t>(s)]);
        NodeSolution sol = solve_node_subproblem(in, p, s);
        double v = gridref::node_term(in, p, s, sol.x_log, sol.R, sol.z);
        double g = gridref::node_grid_max(in, p, s, 1e-4);
        worst = std::max(worst, std::abs(v - g));
        if (v < g - 1e-9 * std::max(1.0, std::abs(g))) ++worse;
    }
    CHECK(worse == 0);
    CHECK(worst <= 1e-3);
}

TEST_CASE("node subproblem against a joint grid") {
    Canonical c;
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 6; ++trial) {
        int s = trial;
        NodeSubproblemInput in = gridref::random_node_input(rng, c.params, s, c.inst.initial_energy[static_cast<std::size_t>(s)],
                                                            c.box.lo[static_cast<std::size_t>(s)],
                                                            c.box.hi[static_cast<std::size_t>(s)]);
        NodeSolution sol = solve_node_subproblem(in, c.params, s);
        double v = gridref::node_term(in, c.params, s, sol.x_log, sol.R, sol.z);
        double g = gridref::node_grid_max_joint(in, c.params, s, 200);
        CHECK(v >= g - 1e-9);
        CHECK(v - g <= 1e-3);
        CHECK(node_subproblem_value(in, c.params, s, sol) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("node subproblem is monotone in its prices") {
    Canonical c;
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        int s = trial % 6;
        NodeSubproblemInput in = gridref::random_node_input(rng, c.params, s, c.inst.initial_energy[static_cast<std::size_t>(s)],
                                                            c.box.lo[static_cast<std::size_t>(s)],
                                                            c.box.hi[static_cast<std::size_t>(s)]);
        double prev_x = INFINITY, prev_R = INFINITY;
        for (int k = 0; k < 20; ++k) {
            NodeSubproblemInput a = in, b = in;
            a.lambda_e2e = 0.2 * k;
            b.mu = 0.1 * k;
            double xl = solve_node_subproblem(a, c.params, s).x_log;
            double R = solve_node_subproblem(b, c.params, s).R;
            CHECK(xl <= prev_x + 1e-9);
            CHECK(R <= prev_R + 1e-9);
            prev_x = xl;
            prev_R = R;
        }
    }
}

TEST_CASE("link allocation examples") {
    auto c = solve_link_allocation({1.0, 1.0}, 2e6);
    CHECK(c[0] == doctest::Approx(1e6).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(1e6).epsilon(1e-12));
    c = solve_link_allocation({1.0, 3.0}, 4e6);
    CHECK(c[0] == doctest::Approx(1e6).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(3e6).epsilon(1e-12));
    CHECK(solve_link_allocation({0.7}, 2.5e6)[0] == doctest::Approx(2.5e6).epsilon(1e-15));
    c = solve_link_allocation({0.0, 2.0}, 4e6);
    CHECK(c[0] == kCapacityFloor);
    CHECK(c[0] + c[1] == doctest::Approx(4e6).epsilon(1e-15));
}

TEST_CASE("link allocation: closed form, feasibility, scale invariance, grid") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> lam(static_cast<std::size_t>(n(rng)));
        for (double& v : lam) v = 0.01 + 3.0 * u(rng);
        double C = 1e6 * (1.0 + 3.0 * u(rng));
        auto c = solve_link_allocation(lam, C);
        double total = std::accumulate(lam.begin(), lam.end(), 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < lam.size(); ++i) {
            CHECK(std::abs(c[i] - lam[i] * C / total) <= 1e-9 * lam[i] * C / total);
            sum += c[i];
        }
        CHECK(sum <= C + 1e-9);
        CHECK(sum >= C * (1.0 - 1e-12));

        double a = 0.001 + 100.0 * u(rng);
        std::vector<double> scaled = lam;
        for (double& v : scaled) v *= a;
        auto cs = solve_link_allocation(scaled, C);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(cs[i] == doctest::Approx(c[i]).epsilon(1e-12));

        CHECK(gridref::link_pairwise_improvement(lam, c, 1e-4) <= 1e-9);
        if (lam.size() == 2 || lam.size() == 3) {
            double g = gridref::link_grid_max(lam, C, lam.size() == 2 ? 1e-4 : 2e-3);
            double v = link_allocation_value(lam, c);
            CHECK(v >= g - 1e-9);
            CHECK(v - g <= 1e-3 * std::max(1.0, std::abs(g)));
        }
    }
}

TEST_CASE("code rate examples") {
    CHECK(solve_code_rate(1.0, 0.0, 20.0) == 1.0);
    CHECK(solve_code_rate(0.0, 1.0, 20.0) == kCodeRateFloor);
    double r = solve_code_rate(1.0, 50.0, 20.0);
    double best = 0.0, fbest = -INFINITY;
    for (int i = 1; i <= 1000000; ++i) {
        double t = i * 1e-6;
        double f = gridref::code_rate_term(1.0, 50.0, 20.0, t);
        if (f > fbest) fbest = f, best = t;
    }
    CHECK(std::abs(r - best) <= 1e-4);
}

TEST_CASE("code rate against grid search") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        double lam = 3.0 * u(rng), mu = 10.0 * u(rng) * u(rng), kappa = 20.0;
        double r = solve_code_rate(lam, mu, kappa);
        double v = gridref::code_rate_term(lam, mu, kappa, r);
        double g = gridref::code_rate_grid_max(lam, mu, kappa, 1e-4);
        CHECK(v >= g - 1e-12);
        CHECK(v - g <= 1e-3);
        CHECK(code_rate_value(lam, mu, kappa, r) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("z box brackets the attainable normalized power") {
    Canonical c;
    for (std::size_t s = 0; s < 6; ++s) {
        CHECK(c.box.lo[s] > 0.0);
        CHECK(c.box.lo[s] < c.box.hi[s]);
        CHECK(c.box.hi[s] / c.box.lo[s] == doctest::Approx(20.0).epsilon(1e-12));
    }
}
