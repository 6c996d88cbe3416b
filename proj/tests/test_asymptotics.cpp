#include "doctest.h"

#include "fixtures.hpp"

#include "cascade/asymptotics.hpp"
#include "cascade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace cascade;

namespace {

JointDistribution quadratic() {
    return JointDistribution({{{2, 2, 0}, 0.2}, {{2, 2, 2}, 0.8}});
}

JointDistribution mixed() {
    return JointDistribution({{{3, 3, 0}, 0.1},
                              {{3, 3, 1}, 0.2},
                              {{3, 3, 2}, 0.2},
                              {{3, 3, 3}, 0.15},
                              {{2, 2, 1}, 0.1},
                              {{2, 2, 2}, 0.2},
                              {{1, 1, 2}, 0.05}});
}

// Schedule matching the thresholds used by the closed-form terminal functions.
ThresholdSchedule schedule_for(const JointDistribution& p, double K, double y, double v, double z, int singular_j) {
    ThresholdSchedule s;
    s.y = y;
    for (const auto& [k, mass] : p.entries()) {
        if (k.c < 1 || k.c > k.i) continue;
        double x = x_threshold(k.i, k.j, k.c, K, v, y, singular_j);
        if (x < y) s.x[k] = x;
    }
    for (auto [i, j] : p.degree_pairs())
        if (is_singular(K, v, j, singular_j) && z < y) s.singular[{i, j}] = z;
    return s;
}

// Interventions per node: hazard of hitting a controlled (c, c-1) state, integrated up to lambda * y.
double it_by_quadrature(const JointDistribution& p, const ThresholdSchedule& s, double y) {
    double lambda = p.lambda();
    std::vector<double> cuts = {0.0, lambda * y};
    for (auto [i, j] : p.degree_pairs())
        for (int c = 1; c <= i; ++c) {
            double x = s.start(i, j, c);
            if (x > 0.0 && x < y) cuts.push_back(lambda * x);
        }
    std::sort(cuts.begin(), cuts.end());
    QuadratureRule rule = gauss_legendre(20);
    double total = 0.0;
    for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
        double a = cuts[q], b = cuts[q + 1];
        if (b - a < 1e-15) continue;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            double tau = mid + half * rule.nodes[g];
            double w = rule.weights[g];
            Trajectory tr = evaluate_schedule(p, s, tau);
            double rate = 0.0;
            for (auto [i, j] : p.degree_pairs())
                for (int c = 1; c <= i; ++c)
                    if (tau >= lambda * s.start(i, j, c)) rate += (i - c + 1) * tr.get(i, j, c, c - 1);
            total += w * half * rate / (lambda - tau);
        }
    }
    return total;
}

double defaulted_mass(const JointDistribution& p, const Trajectory& tr, bool weight_out) {
    double alive = 0.0, total = 0.0;
    for (const auto& [k, mass] : p.entries()) {
        double w = weight_out ? k.j : 1.0;
        total += w * mass;
        if (k.c > k.i) alive += w * mass;
    }
    for (const auto& [key, block] : tr.blocks)
        for (double s : block) alive += (weight_out ? key.second : 1.0) * s;
    return total - alive;
}

} // namespace

TEST_CASE("closed-form propagation") {
    JointDistribution p({{{2, 2, 0}, 0.2}, {{2, 2, 2}, 0.8}});
    Trajectory s0 = Trajectory::initial(p);
    ControlVector on = [](int, int, int) { return true; };
    SUBCASE("zero elapsed time is the identity") {
        Trajectory s = propagate_interval(s0, 0.0, on);
        CHECK(s.sup_distance(s0) == 0.0);
    }
    SUBCASE("binomial reveal law") {
        Trajectory s = propagate_interval(s0, 1.0, on);
        CHECK(s.get(2, 2, 2, 1) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(s.get(2, 2, 2, 0) == doctest::Approx(0.2).epsilon(1e-12));
        Trajectory r = integrate_rk4(p, ThresholdSchedule{}, 1.0, 1e-3);
        CHECK(std::abs(r.get(2, 2, 2, 1) - 0.4) < 1e-8);
    }
    SUBCASE("tau at lambda is refused") {
        CHECK_THROWS_AS(propagate_interval(s0, 2.0, on), std::domain_error);
        CHECK_THROWS_AS(integrate_rk4(p, ThresholdSchedule{}, 1.95, 1e-3), std::domain_error);
        CHECK_THROWS_AS(integrate_rk4(p, ThresholdSchedule{}, 1.0, 0.01), std::domain_error);
    }
    SUBCASE("l <= c - 2 states follow the binomial law under any control") {
        JointDistribution q({{{4, 3, 3}, 0.5}, {{2, 3, 0}, 0.5}});
        Trajectory a = propagate_interval(Trajectory::initial(q), 1.3, on);
        double t = 1.3 / q.lambda();
        for (int l = 0; l <= 1; ++l)
            CHECK(a.get(4, 3, 3, l) ==
                  doctest::Approx(0.5 * std::exp(log_choose(4, l)) * std::pow(1 - t, 4 - l) * std::pow(t, l))
                      .epsilon(1e-12));
    }
}

TEST_CASE("closed form agrees with RK4 on random fixtures") {
    double worst = 0.0;
    for (unsigned seed = 1; seed <= 20; ++seed) {
        fixtures::OdeCase fx = fixtures::random_ode_case(seed);
        Trajectory a = evaluate_schedule(fx.p, fx.schedule, fx.tau);
        Trajectory b = integrate_rk4(fx.p, fx.schedule, fx.tau, 1e-3 * fx.p.lambda());
        worst = std::max(worst, a.sup_distance(b));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("RK4 error falls with the fourth power of the step") {
    JointDistribution p({{{3, 3, 0}, 0.2}, {{3, 3, 1}, 0.3}, {{3, 3, 2}, 0.3}, {{3, 3, 3}, 0.2}});
    ThresholdSchedule s;
    s.x = {{{3, 3, 1}, 0.2}, {{3, 3, 2}, 0.1}};
    double tau = 0.9 * p.lambda();
    Trajectory exact = evaluate_schedule(p, s, tau);
    double e1 = exact.sup_distance(integrate_rk4(p, s, tau, 1e-3 * p.lambda()));
    double e2 = exact.sup_distance(integrate_rk4(p, s, tau, 5e-4 * p.lambda()));
    MESSAGE("RK4 errors " << e1 << " " << e2);
    CHECK(e1 > 0.0);
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 22.0);
}

TEST_CASE("never-controlled schedules keep the invulnerable state empty") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        fixtures::OdeCase fx = fixtures::random_ode_case(seed);
        ThresholdSchedule never;
        Trajectory a = evaluate_schedule(fx.p, never, fx.tau);
        Trajectory b = integrate_rk4(fx.p, never, fx.tau, 1e-3 * fx.p.lambda());
        for (auto [i, j] : fx.p.degree_pairs()) {
            CHECK(a.get(i, j, i + 1, i) == 0.0);
            CHECK(std::abs(b.get(i, j, i + 1, i)) < 1e-15);
        }
    }
}

TEST_CASE("out-degree and default functions") {
    JointDistribution p = quadratic();
    CHECK(I_of(p, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
    for (double y : {0.0, 0.3, 0.7, 1.0}) CHECK(I_of(p, y) == doctest::Approx(0.2 + 0.8 * y * y));
    CHECK(I_of(p, 1.0) == doctest::Approx(1.0));
    JointDistribution q({{{2, 2, 3}, 0.5}, {{2, 2, 1}, 0.5}});
    CHECK(I_of(q, 1.0) == doctest::Approx(0.5));
    double last = -1.0;
    for (int k = 0; k <= 100; ++k) {
        double v = I_of(mixed(), k / 100.0);
        CHECK(v >= last);
        CHECK(v <= 1.0 + 1e-15);
        last = v;
    }
}

TEST_CASE("smallest fixed point") {
    SUBCASE("quadratic") {
        JointDistribution p = quadratic();
        FixedPoint fp = smallest_fixed_point([&](double y) { return I_of(p, y); });
        CHECK(std::abs(fp.y - 0.25) <= 1e-10);
        CHECK(std::abs(J_of(p, fp.y) - 0.25) <= 1e-10);
        CHECK(fp.stable);
        CHECK(fp.slope == doctest::Approx(0.4).epsilon(1e-6));
    }
    SUBCASE("linear reaches total default") {
        JointDistribution p({{{1, 1, 0}, 0.1}, {{1, 1, 1}, 0.9}});
        FixedPoint fp = smallest_fixed_point([&](double y) { return I_of(p, y); });
        CHECK(fp.y == 1.0);
        CHECK(fp.stable);
    }
    SUBCASE("zero root") {
        FixedPoint fp = smallest_fixed_point([](double y) { return 0.5 * y * y; });
        CHECK(fp.y == 0.0);
        CHECK(fp.stable);
    }
    SUBCASE("tangent root is unstable") {
        FixedPoint fp = smallest_fixed_point([](double y) { return 0.25 + y * y; });
        CHECK(fp.y == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(!fp.stable);
    }
}

TEST_CASE("intervention start fractions") {
    for (int i = 1; i <= 4; ++i)
        for (int c = 1; c <= i; ++c) CHECK(x_threshold(i, 2, c, 0.5, 0.3, 0.7) == 0.7);
    CHECK(x_threshold(3, 2, 2, 0.5, 0.2, 0.5) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(x_threshold(3, 2, 1, 0.5, -0.25, 0.8) == 0.0);
    // y = 0 with a negative coefficient: branch 2 is vacuous.
    CHECK(x_threshold(3, 2, 2, 0.5, 0.2, 0.0) == 0.0);
    for (double K : {0.1, 0.5, 2.0})
        for (double v : {-2.0, -0.4, -0.1, 0.0, 0.2})
            for (double y : {0.0, 0.2, 0.6, 1.0})
                for (int i = 1; i <= 6; ++i) {
                    double prev = 2.0;
                    for (int c = 1; c <= i; ++c) {
                        double x = x_threshold(i, 3, c, K, v, y);
                        CHECK(x >= 0.0);
                        CHECK(x <= y);
                        CHECK(x <= prev);
                        double A = K + 3 * v - 1;
                        bool b2 = A < 0 && y > 0 && c < i + A / (K * y);
                        bool b2_prev = c > 1 && A < 0 && y > 0 && c - 1 < i + A / (K * y);
                        if (b2 && b2_prev && x > 0.0 && prev < y) CHECK(x < prev);
                        prev = x;
                    }
                }
}

TEST_CASE("modified terminal functions") {
    JointDistribution p = mixed();
    const double K = 0.5;
    SUBCASE("reduce to I and J when no class is controlled") {
        for (double y : {0.0, 0.3, 0.9}) {
            CHECK(I_tilde(p, K, y, 0.5, y) == doctest::Approx(I_of(p, y)).epsilon(1e-14));
            CHECK(J_tilde(p, K, y, 0.5, y) == doctest::Approx(J_of(p, y)).epsilon(1e-14));
            CHECK(it_of(p, K, y, 0.5, y) == 0.0);
        }
    }
    SUBCASE("z = y removes the singular term") {
        double v = (1.0 - K) / 2.0;
        double a = I_tilde(p, K, 0.6, v, 0.6, 2);
        double b = I_tilde(p, K, 0.6, v, 0.6, 0);
        CHECK(a == doctest::Approx(b).epsilon(1e-14));
        CHECK(J_tilde(p, K, 0.6, v, 0.6, 2) == doctest::Approx(J_tilde(p, K, 0.6, v, 0.6)).epsilon(1e-14));
    }
    SUBCASE("very negative v controls every class from the start") {
        double c0 = 0.0;
        for (const auto& [k, m] : p.entries())
            if (k.c == 0) c0 += k.j * m;
        for (double y : {0.1, 0.5, 0.95}) CHECK(I_tilde(p, K, y, -1e6, y) == doctest::Approx(c0 / p.lambda()));
    }
    SUBCASE("dominance") {
        for (double y = 0.0; y <= 1.0; y += 0.05)
            for (double v : {-3.0, -0.5, -0.2, -0.1, 0.0, 0.1})
                for (double zf : {0.0, 0.5, 1.0}) {
                    CHECK(J_of(p, y) - J_tilde(p, K, y, v, zf * y) >= -1e-14);
                    CHECK(I_of(p, y) - I_tilde(p, K, y, v, zf * y) >= -1e-14);
                }
        for (double y = 0.0; y <= 1.0; y += 0.05)
            for (double zf : {0.0, 0.5, 1.0}) {
                CHECK(J_of(p, y) - J_tilde(p, K, y, 0.25, zf * y, 2) >= -1e-14);
                CHECK(I_of(p, y) - I_tilde(p, K, y, 0.25, zf * y, 2) >= -1e-14);
            }
    }
    SUBCASE("empty window") {
        CHECK(it_of(p, K, 0.0, -1.0, 0.0) == 0.0);
        JointDistribution q({{{2, 2, 0}, 0.2}, {{2, 2, 2}, 0.5}, {{3, 3, 3}, 0.3}});
        CHECK(H_tilde(q, K, 0.0, -1.0) == 0.0);
        // With c = 1 mass the hazard is positive at once.
        double expect = 0.0;
        for (const auto& [k, m] : p.entries())
            if (k.c == 1) expect += std::max(-K, 3.0 * k.j * -1.0 - 1.0) * k.i * m;
        CHECK(H_tilde(p, K, 0.0, -3.0) == doctest::Approx(expect));
    }
}

TEST_CASE("interventions agree with a quadrature of the hazard") {
    JointDistribution p = mixed();
    const double K = 0.5;
    struct Case {
        double y, v, z;
        int singular_j;
    };
    std::vector<Case> cases = {{0.7, 0.4 / 3.0 - 0.1, 0.7, 0}, {0.5, -0.3, 0.5, 0}, {0.9, -5.0, 0.9, 0},
                               {0.8, 0.25, 0.3, 2},        {0.6, 0.25, 0.0, 2},  {0.85, 1.0 / 6.0, 0.5, 3}};
    for (const auto& cs : cases) {
        CAPTURE(cs.y);
        CAPTURE(cs.v);
        CAPTURE(cs.z);
        ThresholdSchedule s = schedule_for(p, K, cs.y, cs.v, cs.z, cs.singular_j);
        double closed = it_of(p, K, cs.y, cs.v, cs.z, cs.singular_j);
        double quad = it_by_quadrature(p, s, cs.y);
        CHECK(std::abs(closed - quad) < 1e-9);
        Trajectory end = evaluate_schedule(p, s, p.lambda() * cs.y);
        CHECK(J_tilde(p, K, cs.y, cs.v, cs.z, cs.singular_j) ==
              doctest::Approx(defaulted_mass(p, end, false)).epsilon(1e-11));
        CHECK(I_tilde(p, K, cs.y, cs.v, cs.z, cs.singular_j) ==
              doctest::Approx(defaulted_mass(p, end, true) / p.lambda()).epsilon(1e-11));
    }
}

TEST_CASE("limits under fixed policies") {
    JointDistribution p = quadratic();
    PolicyLimit none = policy_limit(p, InterventionPolicy::none());
    CHECK(none.T == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(none.D == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(none.IT == 0.0);
    PolicyLimit all = policy_limit(p, InterventionPolicy::complete());
    CHECK(all.D == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(all.T == doctest::Approx(0.2).epsilon(1e-12));
    // A vulnerable node is helped when both in-links fall in the revealed fraction 0.2.
    CHECK(all.IT == doctest::Approx(0.8 * 0.04).epsilon(1e-12));
    InterventionPolicy range = InterventionPolicy::degree_range(3, 3);
    PolicyLimit r = policy_limit(mixed(), range);
    CHECK(r.D >= policy_limit(mixed(), InterventionPolicy::complete()).D);
    CHECK(r.D <= policy_limit(mixed(), InterventionPolicy::none()).D);
}
