#pragma once

#include "cascade/asymptotics.hpp"
#include "cascade/contagion.hpp"
#include "cascade/distribution.hpp"
#include "cascade/network.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace cascade;

struct SmallCase {
    std::string name;
    NodePopulation pop;
    InterventionPolicy policy;
};

inline InterventionPolicy table_policy(std::map<ClassKey, double> start, double lambda,
                                       std::map<std::pair<int, int>, double> singular = {}) {
    InterventionPolicy p;
    p.kind = PolicyKind::threshold_table;
    p.start = std::move(start);
    p.singular = std::move(singular);
    p.lambda = lambda;
    return p;
}

/// Populations with at most six stubs, paired with policies.
inline std::vector<SmallCase> small_cases() {
    NodePopulation ring({{1, 1, 0}, {1, 1, 1}, {1, 1, 1}});
    NodePopulation two({{2, 2, 0}, {2, 2, 1}, {2, 2, 2}});
    NodePopulation mixed({{1, 2, 0}, {2, 1, 1}, {1, 1, 1}, {1, 1, 2}});
    NodePopulation lopsided({{2, 1, 0}, {1, 2, 2}, {1, 1, 1}, {1, 1, 0}});
    NodePopulation wide({{1, 1, 0}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
    return {
        {"ring/none", ring, InterventionPolicy::none()},
        {"ring/complete", ring, InterventionPolicy::complete()},
        {"two/none", two, InterventionPolicy::none()},
        {"two/complete", two, InterventionPolicy::complete()},
        {"two/threshold", two, table_policy({{{2, 2, 1}, 0.5}, {{2, 2, 2}, 0.25}}, 2.0)},
        {"mixed/none", mixed, InterventionPolicy::none()},
        {"mixed/degree", mixed, InterventionPolicy::degree_range(2, 2)},
        {"lopsided/none", lopsided, InterventionPolicy::none()},
        {"lopsided/singular", lopsided, table_policy({}, 1.25, {{{1, 1}, 0.4}})},
        {"wide/none", wide, InterventionPolicy::none()},
        {"wide/threshold", wide, table_policy({{{1, 1, 1}, 0.5}}, 1.0)},
    };
}

/// Random law over degrees <= 5 and a random threshold schedule.
struct OdeCase {
    JointDistribution p;
    ThresholdSchedule schedule;
    double tau;
};

inline OdeCase random_ode_case(unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> deg(1, 5);
    std::map<ClassKey, double> raw;
    int families = 2 + static_cast<int>(gen() % 3);
    double total = 0.0;
    for (int f = 0; f < families; ++f) {
        int i = deg(gen);
        for (int c = 0; c <= i + 1; ++c) {
            double w = unif(gen);
            raw[{i, i, c}] += w;
            total += w;
        }
    }
    std::map<ClassKey, double> entries;
    for (const auto& [k, w] : raw) entries[k] = w / total;
    JointDistribution p(std::move(entries));

    ThresholdSchedule s;
    s.y = 0.5 + 0.5 * unif(gen);
    for (auto [i, j] : p.degree_pairs()) {
        double prev = s.y;
        for (int c = 1; c <= i; ++c) {
            double r = unif(gen);
            if (r < 0.2) continue;  // never
            prev = prev * unif(gen);
            s.x[{i, j, c}] = r < 0.35 ? 0.0 : prev;
        }
        if (unif(gen) < 0.3) s.singular[{i, j}] = s.y * unif(gen);
    }
    double tau = p.lambda() * (0.3 + 0.65 * unif(gen));
    return {p, s, tau};
}

} // namespace fixtures
