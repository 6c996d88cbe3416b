#include "cascade/errors.hpp"
#include "cascade/experiments.hpp"
#include "cascade/network.hpp"
#include "cascade/optimizer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace cascade;
using nlohmann::json;

namespace {

constexpr int kConfigError = 2;
constexpr int kConstructionError = 3;

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    return json::parse(f);
}

// A distribution file holds the spec itself or an object with a "distribution" field.
json distribution_spec(const std::string& path) {
    json j = read_json(path);
    if (j.is_object() && j.contains("distribution")) return j["distribution"];
    return j;
}

const char* branch_name(Branch b) {
    switch (b) {
    case Branch::stage_a: return "stage_a";
    case Branch::stage_b: return "stage_b";
    case Branch::boundary: return "boundary";
    }
    return "";
}

json number_or_null(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

json solution_json(const OPSolution& s, const JointDistribution& p, double K) {
    json out = {{"y", s.y},
                {"v", s.v},
                {"z", s.z},
                {"singular_j", s.singular_j},
                {"branch", branch_name(s.branch)},
                {"objective", s.objective},
                {"it", s.it_value},
                {"jtilde", s.jtilde_value},
                {"residual_h", s.residual_h},
                {"residual_i", s.residual_i},
                {"stable", s.stable},
                {"consistent", s.consistent},
                {"lambda", p.lambda()}};
    if (!s.warning.empty()) out["warning"] = s.warning;
    try {
        Prediction pr = asymptotic_prediction(s, p, K);
        out["prediction"] = {{"D_n", pr.D}, {"IT_n", pr.IT}, {"T_m", pr.T}};
    } catch (const RefusalError& e) {
        out["prediction"] = nullptr;
        out["refusal"] = e.what();
    }
    InterventionPolicy pol = extract_policy(s, p, K);
    json thresholds = json::array();
    for (const auto& [k, x] : pol.start)
        thresholds.push_back({{"i", k.i}, {"j", k.j}, {"c", k.c}, {"x", x}, {"never", x >= s.y}});
    out["thresholds"] = thresholds;
    json singular = json::array();
    for (const auto& [key, z] : pol.singular) singular.push_back({{"i", key.first}, {"j", key.second}, {"z", z}});
    out["singular"] = singular;
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Default cascades on random financial networks with optimal intervention"};
    app.require_subcommand(1);

    std::string dist_path, config_path, trace_path, policy_name = "none", output_dir;
    double K = 0.5;
    unsigned threads = 0;
    std::int64_t n = 10000;
    std::uint64_t seed = 1;
    std::vector<int> alt_range = {8, 10};

    auto* solve = app.add_subcommand("solve", "Solve the optimization problem and print the solution as JSON");
    solve->add_option("-d,--distribution", dist_path, "distribution JSON file")->required();
    solve->add_option("-K,--cost", K, "intervention cost K > 0");
    solve->add_option("-t,--threads", threads, "solver threads (0: all cores)");

    auto* simulate = app.add_subcommand("simulate", "Run one cascade and print its outcome as JSON");
    simulate->add_option("-d,--distribution", dist_path, "distribution JSON file")->required();
    simulate->add_option("-n,--nodes", n, "population size")->check(CLI::PositiveNumber);
    simulate->add_option("-p,--policy", policy_name, "none, complete, alternative or optimal");
    simulate->add_option("-K,--cost", K, "intervention cost K > 0");
    simulate->add_option("-s,--seed", seed, "random seed");
    simulate->add_option("--alternative-range", alt_range, "in-degree range of the alternative policy")
        ->expected(2);
    simulate->add_option("--trace", trace_path, "write the per-step trace CSV here ('-' for stdout)");

    auto* study = app.add_subcommand("study", "Run a size-ladder study and write CSV and SVG outputs");
    study->add_option("-c,--config", config_path, "study config JSON file")->required();
    study->add_option("-o,--output-dir", output_dir, "override the config output_dir");

    auto* compare = app.add_subcommand("compare", "Compare policies by their limiting objectives");
    compare->add_option("-c,--config", config_path, "study config JSON file")->required();
    compare->add_option("-o,--output-dir", output_dir, "override the config output_dir");
    bool with_study = false;
    compare->add_flag("--with-study", with_study, "also run the study and attach empirical means");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*solve) {
            JointDistribution p = distribution_from_json(distribution_spec(dist_path));
            OPSolution s = solve_op(p, K, {threads});
            std::cout << solution_json(s, p, K).dump(2) << "\n";
        } else if (*simulate) {
            JointDistribution p = distribution_from_json(distribution_spec(dist_path));
            StudyConfig cfg;
            cfg.K = K;
            cfg.alternative_lo = alt_range[0];
            cfg.alternative_hi = alt_range[1];
            EmpiricalCounts counts = empirical_counts(p, n);
            NodePopulation pop = instantiate(counts);
            InterventionPolicy policy = make_policy(policy_name, to_distribution(counts), cfg);
            RandomStream rng(seed);
            RunOptions opt;
            opt.trace = !trace_path.empty();
            RunOutcome o = run(pop, policy, rng, opt);
            if (opt.trace) {
                std::ofstream file;
                if (trace_path != "-") {
                    file.open(trace_path);
                    if (!file) throw ValidationError("cannot write " + trace_path);
                }
                std::ostream& out = trace_path == "-" ? std::cout : file;
                out << "k,defaults,interventions,hidden\n";
                for (const auto& r : o.trace)
                    out << r.k << ',' << r.defaults << ',' << r.interventions << ',' << r.hidden << '\n';
            }
            json summary = {{"n", o.n},
                            {"m", o.m},
                            {"policy", policy_name},
                            {"seed", seed},
                            {"T", o.T},
                            {"IT", o.IT},
                            {"D", o.D},
                            {"initial_defaults", o.initial_defaults},
                            {"IT_n", static_cast<double>(o.IT) / o.n},
                            {"D_n", static_cast<double>(o.D) / o.n},
                            {"T_m", static_cast<double>(o.T) / o.m},
                            {"objective", o.objective(K)}};
            (trace_path == "-" ? std::cerr : std::cout) << summary.dump(2) << "\n";
        } else if (*study) {
            StudyConfig cfg = study_config_from_json(read_json(config_path));
            if (!output_dir.empty()) cfg.output_dir = output_dir;
            StudyResult r = run_study(cfg);
            write_study_outputs(cfg, r);
            for (const auto& note : r.notes) std::cerr << "note: " << note << "\n";
            write_dispersion_csv(dispersion_summary(r), std::cout);
        } else if (*compare) {
            StudyConfig cfg = study_config_from_json(read_json(config_path));
            if (!output_dir.empty()) cfg.output_dir = output_dir;
            std::optional<StudyResult> r;
            if (with_study) r = run_study(cfg);
            std::vector<ComparisonRow> rows = compare_policies(cfg, r ? &*r : nullptr);
            std::filesystem::create_directories(cfg.output_dir);
            std::ofstream csv(std::filesystem::path(cfg.output_dir) / "comparison.csv");
            std::ofstream svg(std::filesystem::path(cfg.output_dir) / "comparison.svg");
            if (!csv || !svg) throw ValidationError("cannot write into " + cfg.output_dir);
            write_comparison_csv(rows, csv);
            svg << comparison_svg(rows);
            write_comparison_csv(rows, std::cout);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConstructionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConstructionError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
