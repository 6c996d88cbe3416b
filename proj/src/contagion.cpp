#include "cascade/contagion.hpp"

#include "cascade/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cascade {

InterventionPolicy InterventionPolicy::complete() {
    InterventionPolicy p;
    p.kind = PolicyKind::complete;
    return p;
}

InterventionPolicy InterventionPolicy::degree_range(int lo, int hi) {
    if (lo > hi) throw ValidationError("degree range is empty");
    InterventionPolicy p;
    p.kind = PolicyKind::degree_range;
    p.lo = lo;
    p.hi = hi;
    return p;
}

double InterventionPolicy::start_fraction(int i, int j, int c) const {
    switch (kind) {
    case PolicyKind::none:
        return -1.0;
    case PolicyKind::complete:
        return 0.0;
    case PolicyKind::degree_range:
        return (i >= lo && i <= hi) ? 0.0 : -1.0;
    case PolicyKind::threshold_table: {
        double x = -1.0;
        if (auto s = singular.find({i, j}); c == i && s != singular.end()) {
            x = s->second;
        } else if (auto it = start.find({i, j, c}); it != start.end()) {
            x = it->second;
        }
        return x >= horizon ? -1.0 : x;
    }
    }
    return -1.0;
}

bool InterventionPolicy::intervene(const Node& node, int c, std::int64_t k, std::int64_t n) const {
    double x = start_fraction(node.in, node.out, c);
    if (x < 0.0) return false;
    if (kind != PolicyKind::threshold_table || x == 0.0) return true;
    return static_cast<double>(k) >= static_cast<double>(n) * lambda * x;
}

ContagionState::ContagionState(const NodePopulation& pop)
    : pop_(&pop), equity_(pop.nodes().size()), revealed_(pop.nodes().size(), 0),
      defaulted_(pop.nodes().size(), 0), pool_(pop) {
    for (std::size_t v = 0; v < pop.nodes().size(); ++v) {
        equity_[v] = pop[v].equity;
        if (pop[v].equity == 0) {
            defaulted_[v] = 1;
            ++initial_defaults_;
            hidden_ += pop[v].out;
        }
    }
    defaults_ = initial_defaults_;
}

void step(ContagionState& s, const InterventionPolicy& policy, RandomStream& rng) {
    if (s.hidden_ == 0) throw std::logic_error("step called on a terminated process");
    --s.hidden_;
    int w = s.pool_.draw(rng);
    int l_before = s.revealed_[w]++;
    if (!s.defaulted_[w]) {
        const Node& node = (*s.pop_)[w];
        // Distance one before this reveal: the regulator decides before c is compared with l.
        if (s.equity_[w] - l_before == 1 && policy.intervene(node, s.equity_[w], s.k_, s.pop_->n())) {
            ++s.equity_[w];
            ++s.interventions_;
        }
        if (s.equity_[w] <= s.revealed_[w]) {
            s.defaulted_[w] = 1;
            ++s.defaults_;
            s.hidden_ += node.out;
        }
    }
    ++s.k_;
}

StateAggregate aggregate(const ContagionState& state) {
    StateAggregate agg;
    const auto& nodes = state.population().nodes();
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        const Node& node = nodes[v];
        if (node.equity == 0 || node.equity > node.in || state.defaulted(static_cast<int>(v))) continue;
        ++agg[{node.in, node.out, state.equity(static_cast<int>(v)), state.revealed(static_cast<int>(v))}];
    }
    return agg;
}

RunOutcome run(const NodePopulation& pop, const InterventionPolicy& policy, RandomStream& rng,
               const RunOptions& options) {
    ContagionState state(pop);
    RunOutcome out;
    out.n = pop.n();
    out.m = pop.m();
    out.initial_defaults = state.initial_defaults();

    std::vector<std::int64_t> snap_steps;
    for (double tau : options.snapshot_times) {
        if (!(tau >= 0.0)) throw ValidationError("snapshot times must be nonnegative");
        snap_steps.push_back(static_cast<std::int64_t>(std::floor(tau * static_cast<double>(pop.n()))));
    }
    out.snapshots.resize(snap_steps.size());
    std::vector<char> taken(snap_steps.size(), 0);
    auto take_snapshots = [&](bool final) {
        for (std::size_t s = 0; s < snap_steps.size(); ++s) {
            if (taken[s] || (!final && snap_steps[s] != state.steps())) continue;
            out.snapshots[s] = {options.snapshot_times[s], state.steps(), aggregate(state)};
            taken[s] = 1;
        }
    };
    auto record = [&] {
        if (options.trace)
            out.trace.push_back({state.steps(), state.defaults(), state.interventions(), state.hidden()});
    };

    take_snapshots(false);
    record();
    while (state.hidden() > 0) {
        step(state, policy, rng);
        take_snapshots(false);
        record();
    }
    // The state is frozen after termination, so later snapshot times see the final state.
    take_snapshots(true);

    out.T = state.steps();
    out.IT = state.interventions();
    out.D = state.defaults();
    return out;
}

namespace {

class ExactSolver {
public:
    ExactSolver(const NodePopulation& pop, const InterventionPolicy& policy) : pop_(pop), policy_(policy) {}

    Expectation solve(const Matching& matching) {
        links_ = &matching.links;
        memo_.clear();
        std::vector<int> equity(pop_.nodes().size());
        for (std::size_t v = 0; v < equity.size(); ++v) equity[v] = pop_[v].equity;
        return expand(0, equity);
    }

private:
    Expectation expand(std::uint32_t mask, std::vector<int>& equity) {
        std::string key(reinterpret_cast<const char*>(&mask), sizeof(mask));
        for (int c : equity) key.push_back(static_cast<char>(c));
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        const auto& links = *links_;
        std::size_t n = equity.size();
        std::vector<int> revealed(n, 0);
        int k = 0;
        for (std::size_t e = 0; e < links.size(); ++e)
            if (mask >> e & 1u) {
                ++revealed[links[e].second];
                ++k;
            }
        std::vector<char> defaulted(n);
        for (std::size_t v = 0; v < n; ++v) defaulted[v] = equity[v] <= revealed[v];

        std::vector<std::size_t> hidden;
        for (std::size_t e = 0; e < links.size(); ++e)
            if (!(mask >> e & 1u) && defaulted[links[e].first]) hidden.push_back(e);

        Expectation result;
        if (hidden.empty()) {
            for (std::size_t v = 0; v < n; ++v) {
                result.D += defaulted[v];
                result.IT += equity[v] - pop_[v].equity;
            }
            result.T = k;
        } else {
            double weight = 1.0 / static_cast<double>(hidden.size());
            for (std::size_t e : hidden) {
                int w = links[e].second;
                int saved = equity[w];
                if (!defaulted[w] && equity[w] - revealed[w] == 1 && policy_.intervene(pop_[w], equity[w], k, pop_.n()))
                    ++equity[w];
                Expectation sub = expand(mask | (1u << e), equity);
                equity[w] = saved;
                result.D += weight * sub.D;
                result.IT += weight * sub.IT;
                result.T += weight * sub.T;
            }
        }
        memo_.emplace(std::move(key), result);
        return result;
    }

    const NodePopulation& pop_;
    const InterventionPolicy& policy_;
    const std::vector<std::pair<int, int>>* links_ = nullptr;
    std::unordered_map<std::string, Expectation> memo_;
};

} // namespace

Expectation exact_expectation(const NodePopulation& pop, const InterventionPolicy& policy) {
    if (pop.m() > kMaxEnumerationStubs)
        throw RefusalError("exact expectation refused: m = " + std::to_string(pop.m()) + " exceeds " +
                           std::to_string(kMaxEnumerationStubs));
    ExactSolver solver(pop, policy);
    Expectation total;
    double count = 0.0;
    enumerate_matchings(pop, [&](const Matching& matching) {
        Expectation e = solver.solve(matching);
        total.D += e.D;
        total.IT += e.IT;
        total.T += e.T;
        count += 1.0;
    });
    total.D /= count;
    total.IT /= count;
    total.T /= count;
    return total;
}

} // namespace cascade
