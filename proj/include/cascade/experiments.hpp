#pragma once

#include "cascade/contagion.hpp"
#include "cascade/distribution.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

/// {"kind": "zipf_copula", xi, a1, a2, rho, max_deg} or {"kind": "explicit", "entries": [[i, j, c, mass], ...]}.
JointDistribution distribution_from_json(const nlohmann::json& spec);

struct StudyConfig {
    nlohmann::json distribution;
    std::vector<std::int64_t> sizes = {625, 1296, 2401, 4096, 6561, 10000};
    int runs = 100;
    std::vector<std::string> policies = {"optimal", "alternative"};
    double K = 0.5;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    int alternative_lo = 8;  ///< in-degree range of the alternative policy
    int alternative_hi = 10;
    unsigned threads = 0;
};

/// Throws ValidationError on malformed or inconsistent fields.
StudyConfig study_config_from_json(const nlohmann::json& j);

enum class Variable { IT_n, D_n, T_m };
inline constexpr std::array<Variable, 3> kVariables = {Variable::IT_n, Variable::D_n, Variable::T_m};
std::string variable_name(Variable v);

struct BatchStats {
    double mean = 0.0;
    double sd = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> samples;
};

/// Sample statistics; sd uses n - 1, quartiles interpolate linearly between order statistics.
BatchStats summarize(std::vector<double> samples);

struct StudyCell {
    std::int64_t n = 0;
    std::string policy;
    std::array<BatchStats, 3> stats;
    std::array<double, 3> theory_p{};   ///< NaN when no limit is available
    std::array<double, 3> theory_pn{};
};

struct StudyResult {
    std::vector<StudyCell> cells;
    std::vector<std::string> notes;
};

/// Named policy for a population law; "optimal" solves the optimization problem on that law.
InterventionPolicy make_policy(const std::string& name, const JointDistribution& law, const StudyConfig& cfg);

/// Limits of (IT/n, D/n, T/m) for a named policy under a law; NaN when unavailable.
std::array<double, 3> policy_theory(const std::string& name, const JointDistribution& law, const StudyConfig& cfg);

/// Throws ConstructionError when a population cannot be built.
StudyResult run_study(const StudyConfig& cfg);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    int dropped = 0;
};

/// Least squares of log y on log x; cells with y <= 0 are dropped and counted.
PowerLawFit powerlaw_fit(const std::vector<double>& xs, const std::vector<double>& ys);

struct DispersionSummary {
    std::string policy;
    Variable variable = Variable::D_n;
    PowerLawFit sd_fit;
    PowerLawFit iqr_fit;
    int sd_inversions = 0;
    int iqr_inversions = 0;
};

std::vector<DispersionSummary> dispersion_summary(const StudyResult& result);

struct ComparisonRow {
    std::string policy;
    double D = 0.0;
    double IT = 0.0;
    double objective = 0.0;
    double prevented = 0.0;  ///< limiting default fraction without intervention minus D
    double cost = 0.0;       ///< K * IT
    double delta = 0.0;      ///< objective minus that of the first policy
    std::optional<std::array<double, 3>> empirical;  ///< means of (IT/n, D/n, T/m) at the largest size
};

/// Throws ValidationError with fewer than two policies.
std::vector<ComparisonRow> compare_policies(const StudyConfig& cfg, const StudyResult* study = nullptr);

void write_study_csv(const StudyResult& result, std::ostream& out);
void write_samples_csv(const StudyResult& result, std::ostream& out);
void write_dispersion_csv(const std::vector<DispersionSummary>& rows, std::ostream& out);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

/// Box plots per policy: quartile boxes with 1.5 IQR whiskers beside mean +- sd boxes.
std::string box_plot_svg(const StudyResult& result, Variable variable);
/// Log-log plot of sd and IQR against n.
std::string dispersion_svg(const StudyResult& result);
std::string comparison_svg(const std::vector<ComparisonRow>& rows);

/// Writes study.csv, samples.csv, dispersion.csv and SVG plots into cfg.output_dir.
void write_study_outputs(const StudyConfig& cfg, const StudyResult& result);

} // namespace cascade
