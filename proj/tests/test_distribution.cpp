#include "doctest.h"

#include "cascade/distribution.hpp"
#include "cascade/errors.hpp"
#include "cascade/numerics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cascade;

namespace {

// Reference Zipf law computed independently of the library.
std::vector<double> reference_zipf(double a, int n) {
    std::vector<double> w(n + 1, 0.0);
    double z = 0.0;
    for (int k = 1; k <= n; ++k) z += 1.0 / std::pow(k, 1.0 + a);
    for (int k = 1; k <= n; ++k) w[k] = 1.0 / std::pow(k, 1.0 + a) / z;
    return w;
}

} // namespace

TEST_CASE("bivariate normal cdf matches the orthant formula") {
    for (double rho : {-0.95, -0.5, 0.0, 0.3, 0.9, 0.99}) {
        double exact = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        CHECK(bivariate_normal_cdf(0.0, 0.0, rho) == doctest::Approx(exact).epsilon(1e-13));
    }
    CHECK(bivariate_normal_cdf(1.2, INFINITY, 0.9) == doctest::Approx(normal_cdf(1.2)).epsilon(1e-15));
    CHECK(bivariate_normal_cdf(-INFINITY, 0.3, 0.9) == 0.0);
    // Independence and symmetry in the arguments.
    CHECK(bivariate_normal_cdf(0.4, -1.1, 0.0) == doctest::Approx(normal_cdf(0.4) * normal_cdf(-1.1)).epsilon(1e-15));
    CHECK(bivariate_normal_cdf(0.4, -1.1, 0.7) == doctest::Approx(bivariate_normal_cdf(-1.1, 0.4, 0.7)).epsilon(1e-14));
    // P(X <= h, Y <= k) + P(X <= h, Y > k) = P(X <= h), with P(X <= h, Y > k) = P(X <= h, -Y < -k).
    double h = 0.8, k = -0.3, rho = 0.6;
    CHECK(bivariate_normal_cdf(h, k, rho) + bivariate_normal_cdf(h, -k, -rho) ==
          doctest::Approx(normal_cdf(h)).epsilon(1e-14));
    CHECK_THROWS_AS(bivariate_normal_cdf(0.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double u : {1e-12, 1e-6, 0.01, 0.02425, 0.3, 0.5, 0.77, 0.99, 1 - 1e-9}) {
        CHECK(normal_cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-13));
    }
    CHECK(std::isinf(normal_quantile(0.0)));
    CHECK(std::isinf(normal_quantile(1.0)));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    QuadratureRule r = gauss_legendre(10);
    double s0 = 0.0, s18 = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        s0 += r.weights[k];
        s18 += r.weights[k] * std::pow(r.nodes[k], 18);
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s18 == doctest::Approx(2.0 / 19.0).epsilon(1e-13));
}

TEST_CASE("binomial helpers") {
    CHECK(binom_tail(3, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(binom_tail(4, 0, 0.3) == 1.0);
    CHECK(binom_tail(4, 5, 0.3) == 0.0);
    CHECK(binom_tail(2, 2, 0.25) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(binom_tail(5, 1, 0.0) == 0.0);
    CHECK(binom_tail(5, 5, 1.0) == 1.0);
    CHECK(multinomial3(1, 1, 0, 0.2, 0.3, 0.5) == doctest::Approx(2 * 0.2 * 0.3).epsilon(1e-15));
    CHECK(multinomial3(0, 2, 0, 0.0, 0.2, 0.8) == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(multinomial3(1, 0, 0, 0.0, 0.2, 0.8) == 0.0);
    auto pmf = binom_pmf_all(6, 0.35);
    double total = 0.0;
    for (double v : pmf) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Zipf copula construction") {
    JointDistribution p = build_zipf_copula(0.5, 0.8, 0.7, 0.9, 10);
    auto zd = reference_zipf(0.8, 10), ze = reference_zipf(0.7, 10);

    SUBCASE("initial defaults spread evenly over degrees") {
        for (int i = 1; i <= 10; ++i) CHECK(p.mass(i, i, 0) == doctest::Approx(0.05).epsilon(1e-15));
    }
    SUBCASE("marginals are preserved") {
        for (int i = 1; i <= 10; ++i) {
            double row = 0.0;
            for (int c = 1; c <= 10; ++c) row += p.mass(i, i, c);
            CHECK(std::abs(row - 0.5 * zd[i]) < 1e-9);
        }
        for (int c = 1; c <= 10; ++c) {
            double col = 0.0;
            for (int i = 1; i <= 10; ++i) col += p.mass(i, i, c);
            CHECK(std::abs(col - 0.5 * ze[c]) < 1e-9);
        }
        CHECK(p.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("invulnerable mass is kept") {
        CHECK(p.mass(1, 1, 5) > 0.0);
        CHECK(p.max_degree() == 10);
    }
    SUBCASE("only equal in- and out-degrees") {
        for (const auto& [k, mass] : p.entries()) CHECK(k.i == k.j);
    }
    SUBCASE("mean degree") {
        double expect = 0.0;
        for (int i = 1; i <= 10; ++i) expect += i * (0.05 + 0.5 * zd[i]);
        CHECK(p.lambda() == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("Zipf copula with zero correlation is the product law") {
    JointDistribution p = build_zipf_copula(0.2, 1.1, 0.4, 0.0, 7);
    auto zd = reference_zipf(1.1, 7), ze = reference_zipf(0.4, 7);
    for (int i = 1; i <= 7; ++i)
        for (int c = 1; c <= 7; ++c) CHECK(std::abs(p.mass(i, i, c) - 0.8 * zd[i] * ze[c]) < 1e-12);
}

TEST_CASE("Zipf copula cells agree with Monte Carlo sampling of the copula") {
    const double rho = 0.9;
    const int D = 10, N = 400000;
    JointDistribution p = build_zipf_copula(0.0, 0.8, 0.7, rho, D);
    auto zd = reference_zipf(0.8, D), ze = reference_zipf(0.7, D);
    auto pick = [](const std::vector<double>& pmf, double u) {
        double cdf = 0.0;
        for (std::size_t k = 1; k < pmf.size(); ++k) {
            cdf += pmf[k];
            if (u <= cdf) return static_cast<int>(k);
        }
        return static_cast<int>(pmf.size() - 1);
    };
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> freq(D + 1, std::vector<double>(D + 1, 0.0));
    double degree_sum = 0.0, degree_sq = 0.0;
    for (int s = 0; s < N; ++s) {
        double z1 = gauss(gen), z2 = rho * z1 + std::sqrt(1 - rho * rho) * gauss(gen);
        int i = pick(zd, normal_cdf(z1)), c = pick(ze, normal_cdf(z2));
        freq[i][c] += 1.0;
        degree_sum += i;
        degree_sq += static_cast<double>(i) * i;
    }
    for (int i = 1; i <= D; ++i)
        for (int c = 1; c <= D; ++c) {
            double q = p.mass(i, i, c);
            double se = std::sqrt(q * (1 - q) / N);
            CHECK(std::abs(freq[i][c] / N - q) <= 4.5 * se + 1e-12);
        }
    double mean = degree_sum / N, var = degree_sq / N - mean * mean;
    CHECK(std::abs(mean - p.lambda()) <= 3.0 * std::sqrt(var / N));
}

TEST_CASE("Zipf copula validation") {
    CHECK_THROWS_AS(build_zipf_copula(1.0, 0.8, 0.7, 0.9, 10), ValidationError);
    CHECK_THROWS_AS(build_zipf_copula(0.5, 0.0, 0.7, 0.9, 10), ValidationError);
    CHECK_THROWS_AS(build_zipf_copula(0.5, 0.8, -0.1, 0.9, 10), ValidationError);
    CHECK_THROWS_AS(build_zipf_copula(0.5, 0.8, 0.7, 1.0, 10), ValidationError);
    CHECK_THROWS_AS(build_zipf_copula(0.5, 0.8, 0.7, 0.9, 0), ValidationError);
}

TEST_CASE("distribution invariants") {
    CHECK_THROWS_AS(JointDistribution({{{2, 1, 0}, 1.0}}), ValidationError);
    CHECK_THROWS_AS(JointDistribution({{{1, 1, 0}, 0.7}, {{1, 1, 1}, 0.7}}), ValidationError);
    CHECK_THROWS_AS(JointDistribution({{{1, 1, 0}, -0.1}}), ValidationError);
    JointDistribution q({{{2, 1, 0}, 0.5}, {{1, 2, 1}, 0.5}});
    CHECK(mean_degree(q) == doctest::Approx(1.5));
    // Implied invulnerable mass is allowed.
    JointDistribution r({{{1, 1, 0}, 0.3}});
    CHECK(r.lambda() == doctest::Approx(0.3));
}

TEST_CASE("empirical counts") {
    SUBCASE("rounding examples") {
        JointDistribution p({{{1, 1, 0}, 0.2}, {{1, 1, 1}, 0.8}});
        auto e = empirical_counts(p, 10);
        CHECK(e.counts.at({1, 1, 0}) == 2);
        CHECK(e.counts.at({1, 1, 1}) == 8);
        CHECK(e.m == 10);
    }
    SUBCASE("largest remainder repair") {
        JointDistribution p({{{1, 1, 0}, 0.33}, {{1, 1, 1}, 0.33}, {{1, 1, 2}, 0.34}});
        auto e = empirical_counts(p, 10);
        CHECK(e.counts.at({1, 1, 0}) == 3);
        CHECK(e.counts.at({1, 1, 1}) == 3);
        CHECK(e.counts.at({1, 1, 2}) == 4);
    }
    SUBCASE("stub balance with unequal degrees") {
        JointDistribution p({{{2, 1, 0}, 0.25}, {{1, 2, 1}, 0.25}, {{1, 1, 1}, 0.3}, {{3, 3, 2}, 0.2}});
        for (std::int64_t n : {7, 13, 101, 1000}) {
            auto e = empirical_counts(p, n);
            std::int64_t total = 0, in = 0, out = 0;
            for (const auto& [k, cnt] : e.counts) {
                total += cnt;
                in += k.i * cnt;
                out += k.j * cnt;
            }
            CHECK(total == n);
            CHECK(in == out);
            CHECK(in == e.m);
        }
    }
    SUBCASE("unbalanceable counts name the deficit") {
        JointDistribution p({{{2, 1, 0}, 0.5}, {{1, 2, 1}, 0.5}});
        try {
            empirical_counts(p, 3);
            FAIL("expected a construction error");
        } catch (const ConstructionError& e) {
            CHECK(std::string(e.what()).find("deficit") != std::string::npos);
        }
    }
    SUBCASE("copula law at all study sizes") {
        JointDistribution p = build_zipf_copula(0.5, 0.8, 0.7, 0.9, 10);
        for (std::int64_t n : {625, 1296, 2401, 4096, 6561, 10000}) {
            auto e = empirical_counts(p, n);
            std::int64_t total = 0;
            for (const auto& [k, cnt] : e.counts) total += cnt;
            CHECK(total == n);
            JointDistribution pn = to_distribution(e);
            CHECK(pn.lambda() == doctest::Approx(static_cast<double>(e.m) / n).epsilon(1e-14));
        }
    }
}

TEST_CASE("truncation index") {
    JointDistribution p = build_zipf_copula(0.5, 0.8, 0.7, 0.9, 10);
    CHECK(truncation_index(p, 1e-12) == 11);
    CHECK(truncation_index(p, p.lambda() + 1.0) == 0);
    JointDistribution q({{{1, 1, 0}, 0.5}, {{3, 3, 1}, 0.5}});
    CHECK(truncation_index(q, 1.6) == 2);
    CHECK(truncation_index(q, 1.0) == 4);
    CHECK_THROWS_AS(truncation_index(q, 0.0), ValidationError);
}
