#include "cascade/asymptotics.hpp"

#include "cascade/errors.hpp"
#include "cascade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cascade {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

double choose(int n, int k) {
    return std::round(std::exp(log_choose(n, k)));
}

double ipow(double x, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}

bool vulnerable(const ClassKey& k) {
    return k.c >= 1 && k.c <= k.i;
}

// Start fraction given the switching coefficient A = K + v*j - 1.
double start_from_coefficient(int i, int c, double K, double A, double y) {
    if (A >= 0.0 || c == 0) return y;
    if (y > 0.0 && c < i + A / (K * y)) {
        double x = 1.0 - (1.0 - y) * (i - c) * K / ((i - c + 1) * K + A - K);
        return std::clamp(x, 0.0, y);
    }
    return 0.0;
}

double switching_coefficient(double K, double v, int j, int singular_j) {
    return is_singular(K, v, j, singular_j) ? 0.0 : K + v * j - 1.0;
}

// Expected interventions per node of class (i, c) when control starts at x and the process ends at y.
double interventions_per_node(int i, int c, double x, double y) {
    double s = 0.0;
    for (int m = c; m <= i; ++m)
        for (int n = 0; n <= c - 1; ++n)
            s += (m - c + 1) * multinomial3(n, m - n, i - m, x, y - x, 1.0 - y);
    return s;
}

using Flat = std::vector<double>;

struct Layout {
    std::vector<std::pair<int, int>> families;
    std::vector<std::size_t> offsets;
    std::size_t size = 0;
};

Layout layout_of(const Trajectory& s) {
    Layout lay;
    for (const auto& [key, block] : s.blocks) {
        lay.families.push_back(key);
        lay.offsets.push_back(lay.size);
        lay.size += block.size();
    }
    return lay;
}

Flat flatten(const Trajectory& s) {
    Flat out;
    for (const auto& [key, block] : s.blocks) out.insert(out.end(), block.begin(), block.end());
    return out;
}

void unflatten(const Flat& f, Trajectory& s) {
    std::size_t pos = 0;
    for (auto& [key, block] : s.blocks)
        for (auto& val : block) val = f[pos++];
}

// Right-hand side of the state equations at scaled time tau.
void derivative(const Layout& lay, const Flat& s, double tau, double lambda, const ControlVector& b, Flat& ds) {
    double rate = 1.0 / (lambda - tau);
    for (std::size_t f = 0; f < lay.families.size(); ++f) {
        auto [i, j] = lay.families[f];
        const double* S = s.data() + lay.offsets[f];
        double* dS = ds.data() + lay.offsets[f];
        auto at = [&](int c, int l) { return S[Trajectory::index(i, c, l)]; };
        for (int c = 1; c <= i; ++c) {
            for (int l = 0; l <= c - 1; ++l) {
                double v;
                if (l == 0) {
                    v = -i * at(c, 0);
                } else if (l <= c - 2) {
                    v = (i - l + 1) * at(c, l - 1) - (i - l) * at(c, l);
                } else {
                    double inflow = b(i, j, c - 1) ? (i - c + 2) * at(c - 1, c - 2) : 0.0;
                    v = inflow + (i - c + 2) * at(c, c - 2) - (i - c + 1) * at(c, c - 1);
                }
                dS[Trajectory::index(i, c, l)] = rate * v;
            }
        }
        dS[Trajectory::index(i, i + 1, i)] = b(i, j, i) ? rate * at(i, i - 1) : 0.0;
    }
}

std::vector<double> switch_times(const JointDistribution& p, const ThresholdSchedule& schedule, double tau) {
    std::vector<double> times;
    for (const auto& [key, x] : schedule.x)
        if (p.lambda() * x > 0.0 && p.lambda() * x < tau) times.push_back(p.lambda() * x);
    for (const auto& [key, z] : schedule.singular)
        if (p.lambda() * z > 0.0 && p.lambda() * z < tau) times.push_back(p.lambda() * z);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times.push_back(tau);
    return times;
}

ControlVector control_at(const ThresholdSchedule& schedule, double tau, double lambda) {
    return [&schedule, tau, lambda](int i, int j, int c) { return tau >= lambda * schedule.start(i, j, c); };
}

} // namespace

Trajectory Trajectory::initial(const JointDistribution& p) {
    Trajectory s;
    s.lambda = p.lambda();
    for (const auto& [k, mass] : p.entries()) {
        if (!vulnerable(k)) continue;
        auto& block = s.blocks[{k.i, k.j}];
        if (block.empty()) block.assign(block_size(k.i), 0.0);
        block[index(k.i, k.c, 0)] = mass;
    }
    return s;
}

double Trajectory::get(int i, int j, int c, int l) const {
    auto it = blocks.find({i, j});
    if (it == blocks.end()) return 0.0;
    return it->second[index(i, c, l)];
}

double Trajectory::sup_distance(const Trajectory& other) const {
    double d = 0.0;
    for (const auto& [key, block] : blocks) {
        auto it = other.blocks.find(key);
        for (std::size_t q = 0; q < block.size(); ++q)
            d = std::max(d, std::abs(block[q] - (it == other.blocks.end() ? 0.0 : it->second[q])));
    }
    for (const auto& [key, block] : other.blocks)
        if (!blocks.count(key))
            for (double val : block) d = std::max(d, std::abs(val));
    return d;
}

Trajectory propagate_interval(const Trajectory& s1, double tau2, const ControlVector& b) {
    if (!(tau2 < s1.lambda)) throw std::domain_error("propagate_interval: tau2 must be below lambda");
    if (tau2 < s1.tau) throw std::domain_error("propagate_interval: tau2 precedes the anchor time");
    Trajectory s = s1;
    s.tau = tau2;
    double rho = (s1.lambda - tau2) / (s1.lambda - s1.tau);
    double om = 1.0 - rho;
    for (auto& [key, block] : s.blocks) {
        auto [i, j] = key;
        const auto& src = s1.blocks.at(key);
        auto in = [&](int c, int l) { return src[Trajectory::index(i, c, l)]; };
        // prod(q, e) = b^q * ... * b^e, empty product 1.
        auto prod = [&](int q, int e) {
            for (int k = q; k <= e; ++k)
                if (!b(i, j, k)) return 0.0;
            return 1.0;
        };
        for (int c = 1; c <= i; ++c) {
            for (int l = 0; l <= c - 2; ++l) {
                double sum = 0.0;
                for (int r = 0; r <= l; ++r) sum += in(c, r) * choose(i - r, l - r) * ipow(om, l - r);
                block[Trajectory::index(i, c, l)] = ipow(rho, i - l) * sum;
            }
            double sum = 0.0;
            for (int r = 0; r <= c - 1; ++r)
                for (int q = r + 1; q <= c; ++q)
                    sum += prod(q, c - 1) * in(q, r) * choose(i - r, c - 1 - r) * ipow(om, c - 1 - r);
            block[Trajectory::index(i, c, c - 1)] = ipow(rho, i - c + 1) * sum;
        }
        double inv = in(i + 1, i);
        for (int r = 0; r <= i - 1; ++r)
            for (int q = r + 1; q <= i; ++q) inv += prod(q, i) * in(q, r) * ipow(om, i - r);
        block[Trajectory::index(i, i + 1, i)] = inv;
    }
    return s;
}

double ThresholdSchedule::start(int i, int j, int c) const {
    if (c == i) {
        auto s = singular.find({i, j});
        if (s != singular.end()) return s->second;
    }
    auto it = x.find({i, j, c});
    return it == x.end() ? kNever : it->second;
}

Trajectory evaluate_schedule(const JointDistribution& p, const ThresholdSchedule& schedule, double tau) {
    Trajectory s = Trajectory::initial(p);
    for (double next : switch_times(p, schedule, tau)) {
        s = propagate_interval(s, next, control_at(schedule, s.tau, p.lambda()));
    }
    return s;
}

Trajectory integrate_rk4(const JointDistribution& p, const ThresholdSchedule& schedule, double tau, double h) {
    double lambda = p.lambda();
    if (!(tau <= 0.95 * lambda)) throw std::domain_error("integrate_rk4: tau must not exceed 0.95 lambda");
    if (!(h > 0.0 && h <= 1e-3 * lambda)) throw std::domain_error("integrate_rk4: step must lie in (0, 1e-3 lambda]");
    Trajectory s = Trajectory::initial(p);
    Layout lay = layout_of(s);
    Flat y = flatten(s), k1(lay.size), k2(lay.size), k3(lay.size), k4(lay.size), tmp(lay.size);
    double t = 0.0;
    for (double next : switch_times(p, schedule, tau)) {
        ControlVector b = control_at(schedule, t, lambda);
        double len = next - t;
        auto steps = static_cast<long>(std::ceil(len / h - 1e-9));
        if (steps < 1) steps = 1;
        double dt = len / static_cast<double>(steps);
        for (long n = 0; n < steps; ++n) {
            double t0 = t + n * dt;
            derivative(lay, y, t0, lambda, b, k1);
            for (std::size_t q = 0; q < y.size(); ++q) tmp[q] = y[q] + 0.5 * dt * k1[q];
            derivative(lay, tmp, t0 + 0.5 * dt, lambda, b, k2);
            for (std::size_t q = 0; q < y.size(); ++q) tmp[q] = y[q] + 0.5 * dt * k2[q];
            derivative(lay, tmp, t0 + 0.5 * dt, lambda, b, k3);
            for (std::size_t q = 0; q < y.size(); ++q) tmp[q] = y[q] + dt * k3[q];
            derivative(lay, tmp, t0 + dt, lambda, b, k4);
            for (std::size_t q = 0; q < y.size(); ++q)
                y[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
        t = next;
    }
    unflatten(y, s);
    s.tau = tau;
    return s;
}

double I_of(const JointDistribution& p, double y) {
    double s = 0.0;
    for (const auto& [k, mass] : p.entries())
        if (k.c <= k.i) s += k.j * mass * binom_tail(k.i, k.c, y);
    return s / p.lambda();
}

double J_of(const JointDistribution& p, double y) {
    double s = 0.0;
    for (const auto& [k, mass] : p.entries())
        if (k.c <= k.i) s += mass * binom_tail(k.i, k.c, y);
    return s;
}

FixedPoint smallest_fixed_point(const std::function<double(double)>& f) {
    const int grid = 10000;
    auto g = [&](double y) { return f(y) - y; };
    auto slope_at = [&](double y) {
        const double h = 1e-6;
        double lo = std::max(0.0, y - h), hi = std::min(1.0, y + h);
        return (f(hi) - f(lo)) / (hi - lo);
    };
    auto finish = [&](double y) {
        FixedPoint fp;
        fp.y = y;
        fp.slope = slope_at(y);
        fp.stable = y == 1.0 || fp.slope < 1.0 - 1e-9;
        return fp;
    };

    if (g(0.0) <= 0.0) return finish(0.0);
    double prev = 0.0;
    for (int k = 1; k <= grid; ++k) {
        double y = static_cast<double>(k) / grid;
        double gy = g(y);
        if (k == grid && std::abs(gy) <= 1e-14) return finish(1.0);
        if (gy <= 0.0) {
            if (gy == 0.0) return finish(y);
            double lo = prev, hi = y;
            while (hi - lo > 1e-15) {
                double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (g(mid) > 0.0 ? lo : hi) = mid;
            }
            return finish(hi);
        }
        prev = y;
    }
    return finish(1.0);
}

bool is_singular(double K, double v, int j, int singular_j) {
    if (singular_j > 0 && j == singular_j) return true;
    return std::abs(v * j - 1.0 + K) <= 1e-12;
}

double x_threshold(int i, int j, int c, double K, double v, double y, int singular_j) {
    return start_from_coefficient(i, c, K, switching_coefficient(K, v, j, singular_j), y);
}

double I_tilde(const JointDistribution& p, double K, double y, double v, double z, int singular_j) {
    double s = 0.0;
    for (const auto& [k, mass] : p.entries()) {
        if (k.c > k.i) continue;
        double x = x_threshold(k.i, k.j, k.c, K, v, y, singular_j);
        s += k.j * mass * binom_tail(k.i, k.c, x);
        if (k.c == k.i && k.c >= 1 && is_singular(K, v, k.j, singular_j))
            s -= k.j * mass * (ipow(y, k.i) - ipow(z, k.i));
    }
    return s / p.lambda();
}

double J_tilde(const JointDistribution& p, double K, double y, double v, double z, int singular_j) {
    double s = 0.0;
    for (const auto& [k, mass] : p.entries()) {
        if (k.c > k.i) continue;
        double x = x_threshold(k.i, k.j, k.c, K, v, y, singular_j);
        s += mass * binom_tail(k.i, k.c, x);
        if (k.c == k.i && k.c >= 1 && is_singular(K, v, k.j, singular_j))
            s -= mass * (ipow(y, k.i) - ipow(z, k.i));
    }
    return s;
}

double it_of(const JointDistribution& p, double K, double y, double v, double z, int singular_j) {
    double s = 0.0;
    for (const auto& [k, mass] : p.entries()) {
        if (!vulnerable(k)) continue;
        double x = x_threshold(k.i, k.j, k.c, K, v, y, singular_j);
        s += mass * interventions_per_node(k.i, k.c, x, y);
        // Singular start z: each node whose last in-link is revealed in [z, y) is helped once.
        if (k.c == k.i && is_singular(K, v, k.j, singular_j)) s += mass * (ipow(y, k.i) - ipow(z, k.i));
    }
    return s;
}

double H_tilde(const JointDistribution& p, double K, double y, double v, int singular_j) {
    double s = 0.0;
    for (const auto& [k, mass] : p.entries()) {
        if (!vulnerable(k)) continue;
        double coeff = is_singular(K, v, k.j, singular_j) ? -K : std::max(-K, v * k.j - 1.0);
        double x = x_threshold(k.i, k.j, k.c, K, v, y, singular_j);
        s += coeff * k.i * mass * (binom_tail(k.i - 1, k.c - 1, y) - binom_tail(k.i - 1, k.c, x));
    }
    return s;
}

PolicyLimit policy_limit(const JointDistribution& p, const InterventionPolicy& policy) {
    double scale = 1.0;
    if (policy.kind == PolicyKind::threshold_table && policy.lambda > 0.0) scale = policy.lambda / p.lambda();

    struct Term {
        int i, j, c;
        double mass;
        double x;
    };
    // Without initially defaulted out-links the process never starts.
    double seed = 0.0;
    for (const auto& [k, mass] : p.entries())
        if (k.c == 0) seed += k.j * mass;
    if (seed == 0.0) {
        PolicyLimit idle;
        idle.stable = true;
        return idle;
    }

    std::vector<Term> terms;
    for (const auto& [k, mass] : p.entries()) {
        if (k.c > k.i) continue;
        double x = kNever;
        if (k.c >= 1) {
            double f = policy.start_fraction(k.i, k.j, k.c);
            if (f >= 0.0) x = f * scale;
        }
        terms.push_back({k.i, k.j, k.c, mass, x});
    }

    auto out_degree = [&](double y) {
        double s = 0.0;
        for (const auto& t : terms) s += t.j * t.mass * binom_tail(t.i, t.c, std::min(t.x, y));
        return s / p.lambda();
    };
    FixedPoint fp = smallest_fixed_point(out_degree);

    PolicyLimit lim;
    lim.T = fp.y;
    lim.stable = fp.stable;
    for (const auto& t : terms) {
        double x = std::min(t.x, fp.y);
        lim.D += t.mass * binom_tail(t.i, t.c, x);
        if (t.c >= 1) lim.IT += t.mass * interventions_per_node(t.i, t.c, x, fp.y);
    }
    return lim;
}

} // namespace cascade
