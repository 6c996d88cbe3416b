#include "cascade/experiments.hpp"

#include "cascade/asymptotics.hpp"
#include "cascade/errors.hpp"
#include "cascade/network.hpp"
#include "cascade/optimizer.hpp"
#include "cascade/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace cascade {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
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

struct PlannedPolicy {
    InterventionPolicy policy;
    std::array<double, 3> theory{kNaN, kNaN, kNaN};
};

PlannedPolicy plan_policy(const std::string& name, const JointDistribution& law, const StudyConfig& cfg) {
    PlannedPolicy plan;
    auto from_limit = [&](const PolicyLimit& lim) {
        if (lim.stable || lim.T == 1.0) plan.theory = {lim.IT, lim.D, lim.T};
    };
    if (name == "optimal") {
        OPSolution sol = solve_op(law, cfg.K);
        plan.policy = extract_policy(sol, law, cfg.K);
        if (sol.stable || sol.y == 1.0) {
            Prediction pr = asymptotic_prediction(sol, law, cfg.K);
            plan.theory = {pr.IT, pr.D, pr.T};
        }
        return plan;
    }
    if (name == "none") {
        plan.policy = InterventionPolicy::none();
    } else if (name == "complete") {
        plan.policy = InterventionPolicy::complete();
    } else if (name == "alternative") {
        plan.policy = InterventionPolicy::degree_range(cfg.alternative_lo, cfg.alternative_hi);
    } else {
        throw ValidationError("unknown policy '" + name + "'");
    }
    from_limit(policy_limit(law, plan.policy));
    return plan;
}

double quantile(const std::vector<double>& sorted, double q) {
    double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string svg_header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" "
           "fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

std::string rect(double x, double y, double w, double h, const char* fill, const char* stroke = "black") {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(std::max(h, 0.5)) +
           "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

std::vector<std::string> policy_order(const StudyResult& result) {
    std::vector<std::string> names;
    for (const auto& cell : result.cells)
        if (std::find(names.begin(), names.end(), cell.policy) == names.end()) names.push_back(cell.policy);
    return names;
}

} // namespace

JointDistribution distribution_from_json(const nlohmann::json& spec) {
    if (!spec.is_object()) throw ValidationError("distribution spec must be an object");
    auto kind = field<std::string>(spec, "kind");
    if (kind == "zipf_copula")
        return build_zipf_copula(field<double>(spec, "xi"), field<double>(spec, "a1"), field<double>(spec, "a2"),
                                 field<double>(spec, "rho"), field<int>(spec, "max_deg"));
    if (kind == "explicit") {
        std::map<ClassKey, double> entries;
        for (const auto& e : field<nlohmann::json>(spec, "entries")) {
            if (!e.is_array() || e.size() != 4) throw ValidationError("explicit entries must be [i, j, c, mass]");
            ClassKey k{e[0].get<int>(), e[1].get<int>(), e[2].get<int>()};
            entries[k] += e[3].get<double>();
        }
        return JointDistribution(std::move(entries));
    }
    throw ValidationError("unknown distribution kind '" + kind + "'");
}

StudyConfig study_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("study config must be an object");
    StudyConfig cfg;
    cfg.distribution = field<nlohmann::json>(j, "distribution");
    if (j.contains("sizes")) cfg.sizes = field<std::vector<std::int64_t>>(j, "sizes");
    if (j.contains("runs")) cfg.runs = field<int>(j, "runs");
    if (j.contains("policies")) cfg.policies = field<std::vector<std::string>>(j, "policies");
    if (j.contains("K")) cfg.K = field<double>(j, "K");
    if (j.contains("seed")) cfg.seed = field<std::uint64_t>(j, "seed");
    if (j.contains("output_dir")) cfg.output_dir = field<std::string>(j, "output_dir");
    if (j.contains("threads")) cfg.threads = field<unsigned>(j, "threads");
    if (j.contains("alternative_range")) {
        auto r = field<std::vector<int>>(j, "alternative_range");
        if (r.size() != 2) throw ValidationError("alternative_range must be [lo, hi]");
        cfg.alternative_lo = r[0];
        cfg.alternative_hi = r[1];
    }
    if (cfg.sizes.empty()) throw ValidationError("sizes must not be empty");
    for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
        if (cfg.sizes[k] < 1) throw ValidationError("sizes must be positive");
        if (k > 0 && cfg.sizes[k] <= cfg.sizes[k - 1]) throw ValidationError("sizes must be strictly increasing");
    }
    if (cfg.runs < 2) throw ValidationError("runs must be at least 2");
    if (!(cfg.K > 0.0)) throw ValidationError("K must be positive");
    if (cfg.policies.empty()) throw ValidationError("policies must not be empty");
    distribution_from_json(cfg.distribution);
    return cfg;
}

std::string variable_name(Variable v) {
    switch (v) {
    case Variable::IT_n: return "IT/n";
    case Variable::D_n: return "D/n";
    case Variable::T_m: return "T/m";
    }
    return "";
}

BatchStats summarize(std::vector<double> samples) {
    if (samples.empty()) throw ValidationError("no samples to summarize");
    BatchStats s;
    double n = static_cast<double>(samples.size());
    for (double x : samples) s.mean += x;
    s.mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile(sorted, 0.25);
    s.median = quantile(sorted, 0.5);
    s.q3 = quantile(sorted, 0.75);
    s.iqr = s.q3 - s.q1;
    s.samples = std::move(samples);
    return s;
}

InterventionPolicy make_policy(const std::string& name, const JointDistribution& law, const StudyConfig& cfg) {
    return plan_policy(name, law, cfg).policy;
}

std::array<double, 3> policy_theory(const std::string& name, const JointDistribution& law, const StudyConfig& cfg) {
    return plan_policy(name, law, cfg).theory;
}

StudyResult run_study(const StudyConfig& cfg) {
    JointDistribution p = distribution_from_json(cfg.distribution);
    StudyResult result;
    std::vector<std::array<double, 3>> limit_theory;
    for (const auto& name : cfg.policies) limit_theory.push_back(plan_policy(name, p, cfg).theory);

    RandomStream master(cfg.seed);
    for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
        std::int64_t n = cfg.sizes[s];
        EmpiricalCounts counts;
        try {
            counts = empirical_counts(p, n);
        } catch (const ConstructionError& e) {
            result.notes.push_back("n=" + std::to_string(n) + ": " + e.what());
            continue;
        }
        NodePopulation pop = instantiate(counts);
        JointDistribution pn = to_distribution(counts);
        for (std::size_t q = 0; q < cfg.policies.size(); ++q) {
            PlannedPolicy plan = plan_policy(cfg.policies[q], pn, cfg);
            RandomStream cell_stream = master.split(s * cfg.policies.size() + q);
            std::vector<std::array<double, 3>> samples(static_cast<std::size_t>(cfg.runs));
            parallel_for(samples.size(), cfg.threads, [&](std::size_t r) {
                RandomStream rng = cell_stream.split(r);
                RunOutcome out = run(pop, plan.policy, rng);
                double m = static_cast<double>(out.m);
                samples[r] = {static_cast<double>(out.IT) / n, static_cast<double>(out.D) / n,
                              m > 0 ? static_cast<double>(out.T) / m : 0.0};
            });
            StudyCell cell;
            cell.n = n;
            cell.policy = cfg.policies[q];
            for (std::size_t v = 0; v < 3; ++v) {
                std::vector<double> xs;
                for (const auto& smp : samples) xs.push_back(smp[v]);
                cell.stats[v] = summarize(std::move(xs));
            }
            cell.theory_p = limit_theory[q];
            cell.theory_pn = plan.theory;
            result.cells.push_back(std::move(cell));
        }
    }
    if (result.cells.empty()) throw ConstructionError("no population could be built: " + result.notes.front());
    return result;
}

PowerLawFit powerlaw_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ValidationError("powerlaw_fit: size mismatch");
    PowerLawFit fit;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(ys[k] > 0.0) || !(xs[k] > 0.0)) {
            ++fit.dropped;
            continue;
        }
        lx.push_back(std::log(xs[k]));
        ly.push_back(std::log(ys[k]));
    }
    if (lx.size() < 2) throw ValidationError("powerlaw_fit: fewer than two usable points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    if (sxx == 0.0) throw ValidationError("powerlaw_fit: all sizes are equal");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

std::vector<DispersionSummary> dispersion_summary(const StudyResult& result) {
    std::vector<DispersionSummary> rows;
    for (const auto& name : policy_order(result)) {
        for (std::size_t v = 0; v < 3; ++v) {
            std::vector<double> ns, sds, iqrs;
            for (const auto& cell : result.cells) {
                if (cell.policy != name) continue;
                ns.push_back(static_cast<double>(cell.n));
                sds.push_back(cell.stats[v].sd);
                iqrs.push_back(cell.stats[v].iqr);
            }
            DispersionSummary row;
            row.policy = name;
            row.variable = kVariables[v];
            for (std::size_t k = 1; k < ns.size(); ++k) {
                row.sd_inversions += sds[k] > sds[k - 1];
                row.iqr_inversions += iqrs[k] > iqrs[k - 1];
            }
            if (ns.size() >= 2) {
                try {
                    row.sd_fit = powerlaw_fit(ns, sds);
                } catch (const ValidationError&) {
                    row.sd_fit = {kNaN, kNaN, static_cast<int>(ns.size())};
                }
                try {
                    row.iqr_fit = powerlaw_fit(ns, iqrs);
                } catch (const ValidationError&) {
                    row.iqr_fit = {kNaN, kNaN, static_cast<int>(ns.size())};
                }
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<ComparisonRow> compare_policies(const StudyConfig& cfg, const StudyResult* study) {
    if (cfg.policies.size() < 2) throw ValidationError("comparison needs at least two policies");
    JointDistribution p = distribution_from_json(cfg.distribution);
    double baseline = policy_limit(p, InterventionPolicy::none()).D;
    std::vector<ComparisonRow> rows;
    for (const auto& name : cfg.policies) {
        std::array<double, 3> th = plan_policy(name, p, cfg).theory;
        ComparisonRow row;
        row.policy = name;
        row.IT = th[0];
        row.D = th[1];
        row.cost = cfg.K * th[0];
        row.objective = row.cost + row.D;
        row.prevented = baseline - row.D;
        if (study) {
            const StudyCell* last = nullptr;
            for (const auto& cell : study->cells)
                if (cell.policy == name && (!last || cell.n > last->n)) last = &cell;
            if (last) row.empirical = std::array<double, 3>{last->stats[0].mean, last->stats[1].mean, last->stats[2].mean};
        }
        rows.push_back(row);
    }
    for (auto& row : rows) row.delta = row.objective - rows.front().objective;
    return rows;
}

void write_study_csv(const StudyResult& result, std::ostream& out) {
    out << "n,policy,variable,mean,sd,q1,median,q3,iqr,theory_p,theory_Pn\n";
    for (const auto& cell : result.cells)
        for (std::size_t v = 0; v < 3; ++v) {
            const BatchStats& s = cell.stats[v];
            out << cell.n << ',' << cell.policy << ',' << variable_name(kVariables[v]) << ',' << num(s.mean) << ','
                << num(s.sd) << ',' << num(s.q1) << ',' << num(s.median) << ',' << num(s.q3) << ',' << num(s.iqr)
                << ',' << num(cell.theory_p[v]) << ',' << num(cell.theory_pn[v]) << '\n';
        }
}

void write_samples_csv(const StudyResult& result, std::ostream& out) {
    out << "n,policy,run,IT/n,D/n,T/m\n";
    for (const auto& cell : result.cells)
        for (std::size_t r = 0; r < cell.stats[0].samples.size(); ++r)
            out << cell.n << ',' << cell.policy << ',' << r << ',' << num(cell.stats[0].samples[r]) << ','
                << num(cell.stats[1].samples[r]) << ',' << num(cell.stats[2].samples[r]) << '\n';
}

void write_dispersion_csv(const std::vector<DispersionSummary>& rows, std::ostream& out) {
    out << "policy,variable,sd_slope,iqr_slope,sd_inversions,iqr_inversions,dropped\n";
    for (const auto& r : rows)
        out << r.policy << ',' << variable_name(r.variable) << ',' << num(r.sd_fit.slope) << ','
            << num(r.iqr_fit.slope) << ',' << r.sd_inversions << ',' << r.iqr_inversions << ','
            << r.sd_fit.dropped + r.iqr_fit.dropped << '\n';
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
    out << "policy,D,IT,cost,objective,prevented,delta_objective,empirical_IT/n,empirical_D/n,empirical_T/m\n";
    for (const auto& r : rows) {
        out << r.policy << ',' << num(r.D) << ',' << num(r.IT) << ',' << num(r.cost) << ',' << num(r.objective) << ','
            << num(r.prevented) << ',' << num(r.delta);
        for (std::size_t v = 0; v < 3; ++v) out << ',' << (r.empirical ? num((*r.empirical)[v]) : "nan");
        out << '\n';
    }
}

std::string box_plot_svg(const StudyResult& result, Variable variable) {
    auto v = static_cast<std::size_t>(variable);
    std::vector<std::string> policies = policy_order(result);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& cell : result.cells) {
        const BatchStats& s = cell.stats[v];
        lo = std::min({lo, s.min, s.mean - s.sd});
        hi = std::max({hi, s.max, s.mean + s.sd});
        for (double t : {cell.theory_p[v], cell.theory_pn[v]})
            if (!std::isnan(t)) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const int panel_w = 420, panel_h = 300, margin = 50;
    int width = panel_w * static_cast<int>(policies.size()) + margin;
    std::string svg = svg_header(width, panel_h + 2 * margin);
    svg += text(width / 2.0, 20, variable_name(variable) + " by network size");
    auto ypix = [&](double val) { return margin + panel_h * (hi - val) / (hi - lo); };

    for (std::size_t q = 0; q < policies.size(); ++q) {
        double x0 = margin + static_cast<double>(q) * panel_w;
        svg += rect(x0, margin, panel_w - 20, panel_h, "none", "#999");
        svg += text(x0 + (panel_w - 20) / 2.0, margin - 6, policies[q]);
        std::vector<const StudyCell*> cells;
        for (const auto& cell : result.cells)
            if (cell.policy == policies[q]) cells.push_back(&cell);
        double slot = (panel_w - 20.0) / std::max<std::size_t>(1, cells.size());
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const BatchStats& s = cells[k]->stats[v];
            double cx = x0 + slot * (static_cast<double>(k) + 0.5);
            double bw = slot * 0.3;
            // Quartile box with whiskers at the furthest samples within 1.5 IQR.
            double wlo = s.q1, whi = s.q3;
            for (double x : s.samples) {
                if (x >= s.q1 - 1.5 * s.iqr) wlo = std::min(wlo, x);
                if (x <= s.q3 + 1.5 * s.iqr) whi = std::max(whi, x);
            }
            double bx = cx - bw - 2;
            svg += line(bx + bw / 2, ypix(wlo), bx + bw / 2, ypix(whi), "black");
            svg += rect(bx, ypix(s.q3), bw, ypix(s.q1) - ypix(s.q3), "#9ecae1");
            svg += line(bx, ypix(s.median), bx + bw, ypix(s.median), "black", 2);
            // Mean +- sd box.
            double mx = cx + 2;
            svg += rect(mx, ypix(s.mean + s.sd), bw, ypix(s.mean - s.sd) - ypix(s.mean + s.sd), "#fdd0a2");
            svg += line(mx, ypix(s.mean), mx + bw, ypix(s.mean), "black", 2);
            if (!std::isnan(cells[k]->theory_pn[v]))
                svg += line(cx - bw - 4, ypix(cells[k]->theory_pn[v]), cx + bw + 4, ypix(cells[k]->theory_pn[v]),
                            "red", 1.5);
            svg += text(cx, margin + panel_h + 14, std::to_string(cells[k]->n));
        }
    }
    svg += text(8, ypix(hi) + 4, num(hi), "start");
    svg += text(8, ypix(lo), num(lo), "start");
    svg += "</svg>\n";
    return svg;
}

std::string dispersion_svg(const StudyResult& result) {
    std::vector<std::string> policies = policy_order(result);
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& cell : result.cells)
        for (std::size_t v = 0; v < 3; ++v)
            for (double d : {cell.stats[v].sd, cell.stats[v].iqr})
                if (d > 0.0) {
                    xlo = std::min(xlo, std::log10(static_cast<double>(cell.n)));
                    xhi = std::max(xhi, std::log10(static_cast<double>(cell.n)));
                    ylo = std::min(ylo, std::log10(d));
                    yhi = std::max(yhi, std::log10(d));
                }
    if (!(xhi > xlo)) xhi = xlo + 1.0;
    if (!(yhi > ylo)) yhi = ylo + 1.0;
    const int panel = 280, margin = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::string svg = svg_header(3 * panel + margin, panel + 2 * margin + 20 * static_cast<int>(policies.size()));
    svg += text((3 * panel + margin) / 2.0, 20, "log10 sd (circles) and log10 IQR (squares) against log10 n");
    for (std::size_t v = 0; v < 3; ++v) {
        double x0 = margin + static_cast<double>(v) * panel;
        svg += rect(x0, margin, panel - 20, panel, "none", "#999");
        svg += text(x0 + (panel - 20) / 2.0, margin - 6, variable_name(kVariables[v]));
        auto px = [&](double n) { return x0 + (panel - 20) * (std::log10(n) - xlo) / (xhi - xlo); };
        auto py = [&](double d) { return margin + panel * (yhi - std::log10(d)) / (yhi - ylo); };
        for (std::size_t q = 0; q < policies.size(); ++q) {
            const char* col = colors[q % 6];
            for (const auto& cell : result.cells) {
                if (cell.policy != policies[q]) continue;
                double n = static_cast<double>(cell.n);
                if (cell.stats[v].sd > 0.0)
                    svg += "<circle cx=\"" + num(px(n)) + "\" cy=\"" + num(py(cell.stats[v].sd)) + "\" r=\"3\" fill=\"" +
                           col + "\"/>\n";
                if (cell.stats[v].iqr > 0.0)
                    svg += rect(px(n) - 3, py(cell.stats[v].iqr) - 3, 6, 6, "none", col);
            }
        }
    }
    for (std::size_t q = 0; q < policies.size(); ++q)
        svg += "<text x=\"" + std::to_string(margin) + "\" y=\"" +
               std::to_string(margin + panel + 20 + 20 * static_cast<int>(q)) + "\" fill=\"" + colors[q % 6] + "\">" +
               policies[q] + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string comparison_svg(const std::vector<ComparisonRow>& rows) {
    const int bar = 80, gap = 40, margin = 50, height = 300;
    double top = 0.0;
    for (const auto& r : rows)
        if (std::isfinite(r.objective)) top = std::max(top, r.objective);
    if (!(top > 0.0)) top = 1.0;
    int width = margin * 2 + static_cast<int>(rows.size()) * (bar + gap);
    std::string svg = svg_header(width, height + 2 * margin);
    svg += text(width / 2.0, 20, "limiting objective: defaults (blue) plus K * interventions (orange)");
    for (std::size_t k = 0; k < rows.size(); ++k) {
        double x = margin + static_cast<double>(k) * (bar + gap);
        double d = std::isfinite(rows[k].D) ? rows[k].D : 0.0;
        double c = std::isfinite(rows[k].cost) ? rows[k].cost : 0.0;
        double hd = height * d / top, hc = height * c / top;
        svg += rect(x, margin + height - hd, bar, hd, "#6baed6");
        svg += rect(x, margin + height - hd - hc, bar, hc, "#fd8d3c");
        svg += text(x + bar / 2.0, margin + height + 14, rows[k].policy);
        svg += text(x + bar / 2.0, margin + height - hd - hc - 4, num(rows[k].objective));
    }
    svg += "</svg>\n";
    return svg;
}

void write_study_outputs(const StudyConfig& cfg, const StudyResult& result) {
    namespace fs = std::filesystem;
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    auto write = [&](const char* name, const auto& emit) {
        std::ofstream f(dir / name);
        if (!f) throw ValidationError("cannot write " + (dir / name).string());
        emit(f);
    };
    write("study.csv", [&](std::ostream& o) { write_study_csv(result, o); });
    write("samples.csv", [&](std::ostream& o) { write_samples_csv(result, o); });
    write("dispersion.csv", [&](std::ostream& o) { write_dispersion_csv(dispersion_summary(result), o); });
    write("box_IT.svg", [&](std::ostream& o) { o << box_plot_svg(result, Variable::IT_n); });
    write("box_D.svg", [&](std::ostream& o) { o << box_plot_svg(result, Variable::D_n); });
    write("box_T.svg", [&](std::ostream& o) { o << box_plot_svg(result, Variable::T_m); });
    write("dispersion.svg", [&](std::ostream& o) { o << dispersion_svg(result); });
}

} // namespace cascade
