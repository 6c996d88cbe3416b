#include "cascade/distribution.hpp"

#include "cascade/errors.hpp"
#include "cascade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace cascade {

JointDistribution::JointDistribution(std::map<ClassKey, double> entries) : entries_(std::move(entries)) {
    double total = 0.0;
    for (auto it = entries_.begin(); it != entries_.end();) {
        const auto& [k, mass] = *it;
        if (k.i < 0 || k.j < 0 || k.c < 0) throw ValidationError("negative degree or equity in distribution");
        if (!(mass >= 0.0) || !std::isfinite(mass)) throw ValidationError("distribution mass must be finite and >= 0");
        total += mass;
        if (mass == 0.0) {
            it = entries_.erase(it);
            continue;
        }
        max_degree_ = std::max({max_degree_, k.i, k.j});
        ++it;
    }
    if (entries_.empty()) throw ValidationError("distribution has no mass");
    if (total > 1.0 + 1e-12) throw ValidationError("distribution mass exceeds 1");
    lambda_ = mean_degree(entries_);
}

double JointDistribution::mass(int i, int j, int c) const {
    auto it = entries_.find({i, j, c});
    return it == entries_.end() ? 0.0 : it->second;
}

double JointDistribution::total_mass() const {
    double s = 0.0;
    for (const auto& [k, mass] : entries_) s += mass;
    return s;
}

std::vector<std::pair<int, int>> JointDistribution::degree_pairs() const {
    std::set<std::pair<int, int>> pairs;
    for (const auto& [k, mass] : entries_) pairs.insert({k.i, k.j});
    return {pairs.begin(), pairs.end()};
}

std::vector<int> JointDistribution::out_degrees() const {
    std::set<int> js;
    for (const auto& [k, mass] : entries_) js.insert(k.j);
    return {js.begin(), js.end()};
}

double mean_degree(const std::map<ClassKey, double>& entries) {
    double in = 0.0, out = 0.0;
    for (const auto& [k, mass] : entries) {
        in += k.i * mass;
        out += k.j * mass;
    }
    if (std::abs(in - out) > 1e-12)
        throw ValidationError("mean in-degree and mean out-degree differ: " + std::to_string(in) + " vs " +
                              std::to_string(out));
    return in;
}

double mean_degree(const JointDistribution& p) {
    return mean_degree(p.entries());
}

std::vector<double> zipf_pmf(double a, int max_deg) {
    std::vector<double> pmf(max_deg + 1, 0.0);
    double norm = 0.0;
    for (int k = 1; k <= max_deg; ++k) {
        pmf[k] = std::pow(static_cast<double>(k), -(1.0 + a));
        norm += pmf[k];
    }
    for (int k = 1; k <= max_deg; ++k) pmf[k] /= norm;
    return pmf;
}

JointDistribution build_zipf_copula(double xi, double a1, double a2, double rho, int max_deg) {
    if (!(xi >= 0.0 && xi < 1.0)) throw ValidationError("xi must lie in [0, 1)");
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw ValidationError("Zipf exponents must be positive");
    if (!(rho > -1.0 && rho < 1.0)) throw ValidationError("rho must lie in (-1, 1)");
    if (max_deg < 1) throw ValidationError("max_deg must be at least 1");

    auto quantiles = [&](double a) {
        std::vector<double> pmf = zipf_pmf(a, max_deg);
        std::vector<double> q(max_deg + 1);
        double cdf = 0.0;
        q[0] = -std::numeric_limits<double>::infinity();
        for (int k = 1; k < max_deg; ++k) {
            cdf += pmf[k];
            q[k] = normal_quantile(cdf);
        }
        q[max_deg] = std::numeric_limits<double>::infinity();
        return q;
    };
    std::vector<double> qd = quantiles(a1), qe = quantiles(a2);

    std::vector<std::vector<double>> grid(max_deg + 1, std::vector<double>(max_deg + 1));
    for (int a = 0; a <= max_deg; ++a)
        for (int b = 0; b <= max_deg; ++b) grid[a][b] = bivariate_normal_cdf(qd[a], qe[b], rho);

    std::map<ClassKey, double> entries;
    for (int i = 1; i <= max_deg; ++i) {
        entries[{i, i, 0}] = xi / max_deg;
        for (int c = 1; c <= max_deg; ++c) {
            double cell = grid[i][c] - grid[i - 1][c] - grid[i][c - 1] + grid[i - 1][c - 1];
            entries[{i, i, c}] = (1.0 - xi) * std::max(cell, 0.0);
        }
    }
    return JointDistribution(std::move(entries));
}

namespace {

void balance_stubs(const JointDistribution& p, std::int64_t n, std::map<ClassKey, std::int64_t>& counts) {
    std::int64_t delta = 0;
    for (const auto& [k, cnt] : counts) delta += static_cast<std::int64_t>(k.i - k.j) * cnt;
    if (delta == 0) return;

    std::vector<ClassKey> support;
    for (const auto& [k, mass] : p.entries()) support.push_back(k);

    auto distortion = [&](const ClassKey& k, std::int64_t cnt) {
        return std::abs(static_cast<double>(cnt) - static_cast<double>(n) * p.mass(k.i, k.j, k.c));
    };

    while (delta != 0) {
        const ClassKey* best_from = nullptr;
        const ClassKey* best_to = nullptr;
        std::int64_t best_abs = std::abs(delta);
        double best_cost = std::numeric_limits<double>::infinity();
        for (const auto& from : support) {
            std::int64_t cf = counts[from];
            if (cf == 0) continue;
            for (const auto& to : support) {
                if (to == from) continue;
                std::int64_t shift = (to.i - to.j) - (from.i - from.j);
                std::int64_t after = std::abs(delta + shift);
                if (after >= std::abs(delta)) continue;
                std::int64_t ct = counts[to];
                double cost = distortion(from, cf - 1) - distortion(from, cf) + distortion(to, ct + 1) -
                              distortion(to, ct);
                if (after < best_abs || (after == best_abs && cost < best_cost)) {
                    best_abs = after;
                    best_cost = cost;
                    best_from = &from;
                    best_to = &to;
                }
            }
        }
        if (best_from == nullptr)
            throw ConstructionError("cannot balance in- and out-stubs: deficit of " + std::to_string(delta) +
                                    " in-stubs over out-stubs");
        --counts[*best_from];
        ++counts[*best_to];
        delta += (best_to->i - best_to->j) - (best_from->i - best_from->j);
    }
    std::erase_if(counts, [](const auto& kv) { return kv.second == 0; });
}

} // namespace

EmpiricalCounts empirical_counts(const JointDistribution& p, std::int64_t n) {
    if (n < 1) throw ValidationError("population size must be positive");
    if (std::abs(p.total_mass() - 1.0) > 1e-9)
        throw ConstructionError("distribution mass must sum to 1 to build a finite population");

    struct Cell {
        ClassKey key;
        std::int64_t count;
        double exact;
    };
    std::vector<Cell> cells;
    std::int64_t total = 0;
    for (const auto& [k, mass] : p.entries()) {
        double exact = static_cast<double>(n) * mass;
        auto r = static_cast<std::int64_t>(std::llround(exact));
        cells.push_back({k, r, exact});
        total += r;
    }

    // Largest-remainder repair: add where rounding lost the most, remove where it gained the most.
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    if (total < n) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cells[a].exact - cells[a].count > cells[b].exact - cells[b].count;
        });
        for (std::size_t k = 0; total < n; k = (k + 1) % order.size()) {
            ++cells[order[k]].count;
            ++total;
        }
    } else if (total > n) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cells[a].count - cells[a].exact > cells[b].count - cells[b].exact;
        });
        for (std::size_t k = 0; total > n; k = (k + 1) % order.size()) {
            if (cells[order[k]].count == 0) continue;
            --cells[order[k]].count;
            --total;
        }
    }

    EmpiricalCounts out;
    out.n = n;
    for (const auto& cell : cells)
        if (cell.count > 0) out.counts[cell.key] = cell.count;
    balance_stubs(p, n, out.counts);
    for (const auto& [k, cnt] : out.counts) out.m += static_cast<std::int64_t>(k.i) * cnt;
    return out;
}

JointDistribution to_distribution(const EmpiricalCounts& counts) {
    std::map<ClassKey, double> entries;
    for (const auto& [k, cnt] : counts.counts)
        entries[k] = static_cast<double>(cnt) / static_cast<double>(counts.n);
    return JointDistribution(std::move(entries));
}

int truncation_index(const JointDistribution& p, double eps) {
    if (!(eps > 0.0)) throw ValidationError("truncation tolerance must be positive");
    int top = p.max_degree() + 1;
    std::vector<double> in_tail(top + 1, 0.0), out_tail(top + 1, 0.0);
    for (const auto& [k, mass] : p.entries()) {
        int d = std::max(k.i, k.j);
        in_tail[d] += k.i * mass;
        out_tail[d] += k.j * mass;
    }
    for (int d = top - 1; d >= 0; --d) {
        in_tail[d] += in_tail[d + 1];
        out_tail[d] += out_tail[d + 1];
    }
    for (int m = 0; m <= top; ++m)
        if (in_tail[m] < eps && out_tail[m] < eps) return m;
    return top;
}

} // namespace cascade
