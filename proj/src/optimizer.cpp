#include "cascade/optimizer.hpp"

#include "cascade/asymptotics.hpp"
#include "cascade/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

namespace cascade {

namespace {

constexpr double kFeasible = 1e-9;

using Vec2 = std::array<double, 2>;

double norm_inf(const Vec2& r) {
    return std::max(std::abs(r[0]), std::abs(r[1]));
}

Vec2 stage_a_residual(const JointDistribution& p, double K, double y, double v) {
    return {(1.0 - y) * (H_tilde(p, K, y, v) - p.lambda() * v), I_tilde(p, K, y, v, y) - y};
}

std::optional<Vec2> newton(const JointDistribution& p, double K, Vec2 x) {
    auto F = [&](const Vec2& a) { return stage_a_residual(p, K, a[0], a[1]); };
    Vec2 r = F(x);
    double nr = norm_inf(r);
    for (int iter = 0; iter < 100 && nr > 1e-14; ++iter) {
        double hy = 1e-6, hv = 1e-6 * std::max(1.0, std::abs(x[1]));
        double ylo = std::max(0.0, x[0] - hy), yhi = std::min(1.0, x[0] + hy);
        Vec2 fyp = F({yhi, x[1]}), fym = F({ylo, x[1]});
        Vec2 fvp = F({x[0], x[1] + hv}), fvm = F({x[0], x[1] - hv});
        double a = (fyp[0] - fym[0]) / (yhi - ylo), b = (fvp[0] - fvm[0]) / (2 * hv);
        double c = (fyp[1] - fym[1]) / (yhi - ylo), d = (fvp[1] - fvm[1]) / (2 * hv);
        double det = a * d - b * c;
        if (!std::isfinite(det) || det == 0.0) break;
        Vec2 step = {-(d * r[0] - b * r[1]) / det, -(-c * r[0] + a * r[1]) / det};
        bool moved = false;
        for (double t = 1.0; t > 1e-12; t *= 0.5) {
            Vec2 cand = {std::clamp(x[0] + t * step[0], 0.0, 1.0), x[1] + t * step[1]};
            Vec2 rc = F(cand);
            double nc = norm_inf(rc);
            if (nc < nr) {
                x = cand;
                r = rc;
                nr = nc;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (nr < kFeasible) return x;
    return std::nullopt;
}

std::vector<double> signed_log_grid() {
    std::vector<double> grid = {0.0};
    for (double mag : {1e-3, 1e-2, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0}) {
        grid.push_back(mag);
        grid.push_back(-mag);
    }
    return grid;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t k; (k = next.fetch_add(1)) < count;) fn(k);
        });
    for (auto& th : pool) th.join();
}

bool same_root(const OPSolution& a, const OPSolution& b) {
    return a.singular_j == b.singular_j && std::abs(a.y - b.y) <= 1e-8 && std::abs(a.v - b.v) <= 1e-8 &&
           std::abs(a.z - b.z) <= 1e-8;
}

void add_unique(std::vector<OPSolution>& roots, const OPSolution& s) {
    for (const auto& r : roots)
        if (same_root(r, s)) return;
    roots.push_back(s);
}

// Roots of a continuous function on [lo, hi] located by a uniform scan and bisection.
template <typename Fn>
std::vector<double> scan_roots(Fn&& f, double lo, double hi, int cells) {
    std::vector<double> roots;
    double xa = lo, fa = f(lo);
    if (fa == 0.0) roots.push_back(lo);
    for (int k = 1; k <= cells; ++k) {
        double xb = lo + (hi - lo) * k / cells;
        double fb = f(xb);
        if (fb == 0.0) {
            roots.push_back(xb);
        } else if (fa * fb < 0.0) {
            double a = xa, b = xb, ga = fa;
            for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                double mid = 0.5 * (a + b);
                double gm = f(mid);
                if (gm == 0.0) {
                    a = b = mid;
                    break;
                }
                if ((gm > 0.0) == (ga > 0.0)) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(std::abs(f(a)) <= std::abs(f(b)) ? a : b);
        }
        xa = xb;
        fa = fb;
    }
    return roots;
}

bool better(const OPSolution& a, const OPSolution& b) {
    if (std::abs(a.objective - b.objective) > 1e-12) return a.objective < b.objective;
    return a.y < b.y;
}

} // namespace

OPSolution evaluate_candidate(const JointDistribution& p, double K, double y, double v, double z, int singular_j,
                              Branch branch) {
    OPSolution s;
    s.y = y;
    s.v = v;
    s.z = z;
    s.singular_j = singular_j;
    s.branch = branch;
    s.residual_h = (1.0 - y) * (H_tilde(p, K, y, v, singular_j) - p.lambda() * v);
    s.residual_i = I_tilde(p, K, y, v, z, singular_j) - y;
    s.it_value = it_of(p, K, y, v, z, singular_j);
    s.jtilde_value = J_tilde(p, K, y, v, z, singular_j);
    s.objective = K * s.it_value + s.jtilde_value;

    PolicyLimit realized = policy_limit(p, extract_policy(s, p, K));
    s.consistent = std::abs(realized.T - y) <= 1e-7;
    s.stable = y == 1.0 || (s.consistent && realized.stable);
    return s;
}

std::vector<OPSolution> solve_stage_a(const JointDistribution& p, double K, const SolverOptions& options) {
    if (!(K > 0.0)) throw ValidationError("intervention cost K must be positive");
    std::vector<Vec2> starts;
    for (int k = 1; k <= 19; ++k)
        for (double v : signed_log_grid()) starts.push_back({0.05 * k, v});

    std::vector<std::optional<Vec2>> found(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t k) { found[k] = newton(p, K, starts[k]); });

    std::vector<Vec2> distinct;
    for (const auto& f : found) {
        if (!f) continue;
        bool seen = false;
        for (const auto& d : distinct) seen = seen || (std::abs(d[0] - (*f)[0]) <= 1e-8 && std::abs(d[1] - (*f)[1]) <= 1e-8);
        if (!seen) distinct.push_back(*f);
    }
    std::vector<OPSolution> roots;
    for (const auto& d : distinct) {
        OPSolution s = evaluate_candidate(p, K, d[0], d[1], d[0], 0, Branch::stage_a);
        if (std::abs(s.residual_h) < kFeasible && std::abs(s.residual_i) < kFeasible) add_unique(roots, s);
    }
    return roots;
}

std::vector<OPSolution> solve_stage_b(const JointDistribution& p, double K, int j) {
    if (!(K > 0.0)) throw ValidationError("intervention cost K must be positive");
    if (j <= 0) throw ValidationError("singular out-degree must be positive");
    auto js = p.out_degrees();
    if (!std::binary_search(js.begin(), js.end(), j)) throw ValidationError("out-degree not in the support");

    double v = (1.0 - K) / j;
    double lambda = p.lambda();
    auto h_res = [&](double y) { return (1.0 - y) * (H_tilde(p, K, y, v, j) - lambda * v); };

    std::vector<OPSolution> roots;
    for (double y : scan_roots(h_res, 0.0, 1.0, 2000)) {
        if (y >= 1.0) continue;
        auto i_res = [&](double z) { return I_tilde(p, K, y, v, z, j) - y; };
        std::vector<double> zs;
        if (std::abs(i_res(y)) < kFeasible) {
            zs.push_back(y);
        } else {
            for (double z : scan_roots(i_res, 0.0, y, 64)) zs.push_back(z);
        }
        for (double z : zs) {
            OPSolution s = evaluate_candidate(p, K, y, v, std::clamp(z, 0.0, y), j, Branch::stage_b);
            if (std::abs(s.residual_h) < kFeasible && std::abs(s.residual_i) < kFeasible) add_unique(roots, s);
        }
    }
    return roots;
}

OPSolution solve_op(const JointDistribution& p, double K, const SolverOptions& options) {
    std::vector<OPSolution> candidates = solve_stage_a(p, K, options);
    for (int j : p.out_degrees())
        if (j > 0)
            for (const auto& s : solve_stage_b(p, K, j)) candidates.push_back(s);

    // y = 1 is feasible only when every out-link eventually leads to a default.
    double vulnerable_out = 0.0;
    int j_min = 0;
    for (const auto& [k, mass] : p.entries()) {
        if (k.c <= k.i) vulnerable_out += k.j * mass;
        if (k.j > 0 && (j_min == 0 || k.j < j_min)) j_min = k.j;
    }
    if (std::abs(vulnerable_out - p.lambda()) <= 1e-12 && j_min > 0) {
        double v = std::max(0.0, (1.0 - K) / j_min) + 1.0;
        OPSolution s = evaluate_candidate(p, K, 1.0, v, 1.0, 0, Branch::boundary);
        if (std::abs(s.residual_i) < kFeasible) candidates.push_back(s);
    }

    // y = 0 with no initially defaulted out-links.
    if (std::abs(I_tilde(p, K, 0.0, 0.0, 0.0)) == 0.0) {
        auto h0 = [&](double v) { return H_tilde(p, K, 0.0, v) - p.lambda() * v; };
        for (double v : scan_roots(h0, -100.0, 100.0, 20000)) {
            OPSolution s = evaluate_candidate(p, K, 0.0, v, 0.0, 0, Branch::boundary);
            if (std::abs(s.residual_h) < kFeasible && std::abs(s.residual_i) < kFeasible) add_unique(candidates, s);
        }
    }

    if (candidates.empty()) throw ConstructionError("no feasible root of the terminal-condition system");

    const OPSolution* best = nullptr;
    for (const auto& s : candidates)
        if (s.stable && (!best || better(s, *best))) best = &s;
    if (best) return *best;

    for (const auto& s : candidates)
        if (!best || better(s, *best)) best = &s;
    OPSolution out = *best;
    out.warning = "no stable root; convergence of the finite process to this solution is not guaranteed";
    return out;
}

InterventionPolicy extract_policy(const OPSolution& sol, const JointDistribution& p, double K) {
    InterventionPolicy policy;
    policy.kind = PolicyKind::threshold_table;
    policy.lambda = p.lambda();
    policy.horizon = sol.y;
    for (auto [i, j] : p.degree_pairs()) {
        if (i < 1) continue;
        for (int c = 1; c <= i; ++c) policy.start[{i, j, c}] = x_threshold(i, j, c, K, sol.v, sol.y, sol.singular_j);
        if (is_singular(K, sol.v, j, sol.singular_j)) policy.singular[{i, j}] = sol.z;
    }
    return policy;
}

Prediction asymptotic_prediction(const OPSolution& sol, const JointDistribution& p, double K) {
    if (!sol.stable && sol.y < 1.0)
        throw RefusalError("solution at y = " + std::to_string(sol.y) +
                           " is not a stable end point; no limit prediction is available");
    Prediction pr;
    pr.D = J_tilde(p, K, sol.y, sol.v, sol.z, sol.singular_j);
    pr.IT = it_of(p, K, sol.y, sol.v, sol.z, sol.singular_j);
    pr.T = sol.y;
    return pr;
}

} // namespace cascade
