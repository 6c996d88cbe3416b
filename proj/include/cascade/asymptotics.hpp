#pragma once

#include "cascade/contagion.hpp"
#include "cascade/distribution.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace cascade {

/**
 * Scaled state masses s^{i,j,c,l} at scaled time tau, over the states
 * 0 <= l < c <= i of each (i, j) family plus the invulnerable state (i+1, i).
 */
class Trajectory {
public:
    double tau = 0.0;
    double lambda = 0.0;
    std::map<std::pair<int, int>, std::vector<double>> blocks;

    /// s_0: vulnerable mass at l = 0.
    static Trajectory initial(const JointDistribution& p);

    static std::size_t block_size(int i) { return static_cast<std::size_t>(i) * (i + 1) / 2 + 1; }
    /// Offset of (c, l) within a family block; (i+1, i) is the last slot.
    static std::size_t index(int i, int c, int l) {
        return c == i + 1 ? block_size(i) - 1 : static_cast<std::size_t>(c) * (c - 1) / 2 + l;
    }

    double get(int i, int j, int c, int l) const;
    double sup_distance(const Trajectory& other) const;
};

/// Constant control on [tau1, tau2): b(i, j, c) for state (i, j, c, c-1).
using ControlVector = std::function<bool(int i, int j, int c)>;

/// Closed-form solution on [s1.tau, tau2) under constant control b. Throws std::domain_error if tau2 >= lambda.
Trajectory propagate_interval(const Trajectory& s1, double tau2, const ControlVector& b);

/**
 * Start fractions x for states (i, j, c, c-1) and singular starts z for
 * (i, j, i, i-1). Control is on from scaled time lambda * x; classes absent
 * from both maps are never controlled.
 */
struct ThresholdSchedule {
    std::map<ClassKey, double> x;
    std::map<std::pair<int, int>, double> singular;
    double y = 1.0;
    double v = 0.0;
    double K = 0.0;

    /// Start fraction, or +inf when never controlled.
    double start(int i, int j, int c) const;
};

/// Closed-form trajectory at tau, restarting at each switch time below tau.
Trajectory evaluate_schedule(const JointDistribution& p, const ThresholdSchedule& schedule, double tau);

/// RK4 integration of the state equations; tau <= 0.95 lambda and h <= 1e-3 lambda.
Trajectory integrate_rk4(const JointDistribution& p, const ThresholdSchedule& schedule, double tau, double h);

/// Limiting scaled out-degree of the default set when a fraction y of links is revealed.
double I_of(const JointDistribution& p, double y);
/// Limiting default fraction when a fraction y of links is revealed.
double J_of(const JointDistribution& p, double y);

struct FixedPoint {
    double y = 0.0;
    bool stable = false;
    double slope = 0.0;
};

/// Smallest y in [0, 1] with f(y) = y; stable iff f'(y) < 1 - 1e-9 or y = 1.
FixedPoint smallest_fixed_point(const std::function<double(double)>& f);

/// True when v * j - 1 = -K, within 1e-12 or exactly when j equals singular_j > 0.
bool is_singular(double K, double v, int j, int singular_j = 0);

/// Start fraction of interventions on (i, j, c, c-1).
double x_threshold(int i, int j, int c, double K, double v, double y, int singular_j = 0);

double I_tilde(const JointDistribution& p, double K, double y, double v, double z, int singular_j = 0);
double J_tilde(const JointDistribution& p, double K, double y, double v, double z, int singular_j = 0);
double it_of(const JointDistribution& p, double K, double y, double v, double z, int singular_j = 0);
double H_tilde(const JointDistribution& p, double K, double y, double v, int singular_j = 0);

/// Limits of (D/n, IT/n, T/m) under a fixed policy.
struct PolicyLimit {
    double D = 0.0;
    double IT = 0.0;
    double T = 0.0;
    bool stable = false;
};

/**
 * Limits for a policy whose start fractions are fixed in advance: the process
 * ends at the smallest fixed point of the out-degree function of the default
 * set. Assumes start fractions nonincreasing in c within each (i, j) family.
 */
PolicyLimit policy_limit(const JointDistribution& p, const InterventionPolicy& policy);

} // namespace cascade
