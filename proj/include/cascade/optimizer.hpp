#pragma once

#include "cascade/contagion.hpp"
#include "cascade/distribution.hpp"

#include <string>
#include <vector>

namespace cascade {

enum class Branch { stage_a, stage_b, boundary };

/**
 * Root of the terminal-condition system: y is the fraction of links revealed
 * at the end, v the terminal multiplier and z the start fraction on singular
 * classes (out-degree singular_j, zero when none).
 */
struct OPSolution {
    double y = 0.0;
    double v = 0.0;
    double z = 0.0;
    int singular_j = 0;
    Branch branch = Branch::stage_a;
    double objective = 0.0;
    double it_value = 0.0;
    double jtilde_value = 0.0;
    double residual_h = 0.0;
    double residual_i = 0.0;
    /// Derivative of the end-of-process fixed-point map under the extracted policy is below 1, or y = 1.
    bool stable = false;
    /// y is the first fixed point reached when the extracted policy is applied.
    bool consistent = false;
    std::string warning;
};

struct SolverOptions {
    unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Roots with z = y found by damped Newton from a grid of starts.
std::vector<OPSolution> solve_stage_a(const JointDistribution& p, double K, const SolverOptions& options = {});

/// Roots with v = (1 - K) / j, making out-degree j singular.
std::vector<OPSolution> solve_stage_b(const JointDistribution& p, double K, int j);

/// Minimum objective over all roots and boundary candidates.
OPSolution solve_op(const JointDistribution& p, double K, const SolverOptions& options = {});

/// Residuals and objective of the system at (y, v, z).
OPSolution evaluate_candidate(const JointDistribution& p, double K, double y, double v, double z, int singular_j,
                              Branch branch);

/// Threshold policy realizing a solution; start fractions at y or above mean never.
InterventionPolicy extract_policy(const OPSolution& sol, const JointDistribution& p, double K);

struct Prediction {
    double D = 0.0;   ///< limit of D/n
    double IT = 0.0;  ///< limit of IT/n
    double T = 0.0;   ///< limit of T/m
};

/// Throws RefusalError for an unstable solution with y < 1.
Prediction asymptotic_prediction(const OPSolution& sol, const JointDistribution& p, double K);

} // namespace cascade
