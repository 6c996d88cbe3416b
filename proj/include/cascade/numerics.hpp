#pragma once

#include <vector>

namespace cascade {

double normal_cdf(double x);

/// Inverse of normal_cdf; returns -inf/+inf at 0/1.
double normal_quantile(double u);

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho, |rho| < 1.
/// Infinite limits are allowed.
double bivariate_normal_cdf(double h, double k, double rho);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

double log_factorial(int n);
double log_choose(int n, int k);

/// P(Bin(n, p) = k).
double binom_pmf(int n, int k, double p);

/// P(Bin(n, p) >= c).
double binom_tail(int n, int c, double p);

/// Probabilities P(Bin(n, p) = k) for k = 0..n.
std::vector<double> binom_pmf_all(int n, double p);

/// Multinomial probability of counts (a, b, c) with cell probabilities (pa, pb, pc).
double multinomial3(int a, int b, int c, double pa, double pb, double pc);

} // namespace cascade
