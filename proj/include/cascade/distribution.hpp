#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace cascade {

/// Node class: in-degree i, out-degree j, initial equity c.
struct ClassKey {
    int i = 0;
    int j = 0;
    int c = 0;
    auto operator<=>(const ClassKey&) const = default;
};

/**
 * Joint law p(i, j, c) of in-degree, out-degree and initial equity.
 * Classes with c > i are invulnerable; c = 0 are the initial defaults.
 */
class JointDistribution {
public:
    JointDistribution() = default;

    /// Validates masses and degree balance; throws ValidationError.
    explicit JointDistribution(std::map<ClassKey, double> entries);

    const std::map<ClassKey, double>& entries() const { return entries_; }
    double mass(int i, int j, int c) const;
    double lambda() const { return lambda_; }
    int max_degree() const { return max_degree_; }
    double total_mass() const;

    /// Distinct (i, j) pairs carrying mass, sorted.
    std::vector<std::pair<int, int>> degree_pairs() const;

    /// Distinct out-degrees carrying mass, sorted.
    std::vector<int> out_degrees() const;

private:
    std::map<ClassKey, double> entries_;
    double lambda_ = 0.0;
    int max_degree_ = 0;
};

struct EmpiricalCounts {
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::map<ClassKey, std::int64_t> counts;
};

/**
 * Zipf degree and equity marginals on 1..max_deg coupled by a Gaussian copula,
 * on classes with equal in- and out-degree. A fraction xi of nodes, spread
 * evenly over degrees, starts in default.
 */
JointDistribution build_zipf_copula(double xi, double a1, double a2, double rho, int max_deg);

/// Zipf law P(k) proportional to k^-(1+a) on 1..max_deg; index 0 unused.
std::vector<double> zipf_pmf(double a, int max_deg);

/**
 * Integer node counts summing to n, rounded from n * p and repaired by largest
 * remainder. Classes with unequal degrees are rebalanced so that total in- and
 * out-stubs match; throws ConstructionError when that fails.
 */
EmpiricalCounts empirical_counts(const JointDistribution& p, std::int64_t n);

/// Empirical law P_n of a finite population.
JointDistribution to_distribution(const EmpiricalCounts& counts);

/// Mean degree; throws ValidationError if the in and out means differ by more than 1e-12.
double mean_degree(const std::map<ClassKey, double>& entries);
double mean_degree(const JointDistribution& p);

/// Smallest M with the in- and out-degree weighted mass of classes with max(i, j) >= M below eps.
int truncation_index(const JointDistribution& p, double eps);

} // namespace cascade
