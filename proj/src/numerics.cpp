#include "cascade/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cascade {

namespace {

double log_or_neg_inf(double x) {
    return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

// k * log(p) with the convention 0 * log(0) = 0.
double xlogy(int k, double logp) {
    return k == 0 ? 0.0 : k * logp;
}

} // namespace

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double u) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    if (u >= 1.0) return std::numeric_limits<double>::infinity();

    // Acklam's rational approximation, relative error about 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (u < plow) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        double q = u - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement against the erfc-based cdf.
    for (int it = 0; it < 2; ++it) {
        double e = normal_cdf(x) - u;
        double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        if (pdf <= 0.0) break;
        double step = e / pdf;
        x -= step / (1.0 + 0.5 * x * step);
    }
    return x;
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

double bivariate_normal_cdf(double h, double k, double rho) {
    if (!(std::abs(rho) < 1.0)) throw std::domain_error("bivariate_normal_cdf: |rho| must be < 1");
    if (h == -std::numeric_limits<double>::infinity() || k == -std::numeric_limits<double>::infinity())
        return 0.0;
    if (h == std::numeric_limits<double>::infinity()) return normal_cdf(k);
    if (k == std::numeric_limits<double>::infinity()) return normal_cdf(h);

    double base = normal_cdf(h) * normal_cdf(k);
    if (rho == 0.0) return base;

    // Plackett's identity with r = sin(theta): the integrand is smooth on [0, asin(rho)].
    static const QuadratureRule rule = gauss_legendre(20);
    const int panels = 8;
    double top = std::asin(rho);
    double width = top / panels;
    double hk = h * k, hh = 0.5 * (h * h + k * k);
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = (p + 0.5) * width;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double theta = mid + 0.5 * width * rule.nodes[q];
            double s = std::sin(theta), c2 = 1.0 - s * s;
            sum += rule.weights[q] * std::exp((hk * s - hh) / c2);
        }
    }
    return base + sum * 0.5 * width / (2.0 * std::numbers::pi);
}

double log_factorial(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(256);
        t[0] = 0.0;
        for (int i = 1; i < 256; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    if (n < 256) return table[n];
    return std::lgamma(n + 1.0);
}

double log_choose(int n, int k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double binom_pmf(int n, int k, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    return std::exp(log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

double binom_tail(int n, int c, double p) {
    if (c <= 0) return 1.0;
    if (c > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    // Leading term in log space, later terms by the pmf ratio.
    double ratio = p / (1.0 - p);
    double term = binom_pmf(n, c, p);
    double s = term;
    for (int k = c; k < n; ++k) {
        term *= ratio * (n - k) / (k + 1);
        s += term;
    }
    return s;
}

std::vector<double> binom_pmf_all(int n, double p) {
    std::vector<double> out(n + 1, 0.0);
    if (p <= 0.0) { out[0] = 1.0; return out; }
    if (p >= 1.0) { out[n] = 1.0; return out; }
    double lp = std::log(p), lq = std::log1p(-p);
    for (int k = 0; k <= n; ++k) out[k] = std::exp(log_choose(n, k) + k * lp + (n - k) * lq);
    return out;
}

double multinomial3(int a, int b, int c, double pa, double pb, double pc) {
    if (a < 0 || b < 0 || c < 0) return 0.0;
    if ((a > 0 && pa <= 0.0) || (b > 0 && pb <= 0.0) || (c > 0 && pc <= 0.0)) return 0.0;
    double lg = log_factorial(a + b + c) - log_factorial(a) - log_factorial(b) - log_factorial(c);
    lg += xlogy(a, log_or_neg_inf(pa)) + xlogy(b, log_or_neg_inf(pb)) + xlogy(c, log_or_neg_inf(pc));
    return std::exp(lg);
}

} // namespace cascade
