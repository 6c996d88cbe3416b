#pragma once

#include "cascade/distribution.hpp"
#include "cascade/network.hpp"
#include "cascade/random.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace cascade {

enum class PolicyKind { none, complete, degree_range, threshold_table };

/**
 * Rule deciding whether the regulator adds one unit of equity to a node hit
 * while at distance one from default. Threshold tables map a class (i, j, c),
 * with c the current buffer, to a start fraction x: intervene at step k iff
 * k >= n * lambda * x. Classes absent from the table are never intervened.
 */
struct InterventionPolicy {
    PolicyKind kind = PolicyKind::none;
    int lo = 0;
    int hi = -1;
    std::map<ClassKey, double> start;
    std::map<std::pair<int, int>, double> singular;  ///< (i, j) -> z, used for state (i, j, i, i-1)
    double lambda = 0.0;
    /// Table entries at or above this fraction mean never (a start at the end of the process).
    double horizon = 2.0;

    static InterventionPolicy none() { return {}; }
    static InterventionPolicy complete();
    /// Intervene from the start on nodes with in-degree in [lo, hi].
    static InterventionPolicy degree_range(int lo, int hi);

    /// Start fraction for a node of class (i, j) with current buffer c, or a negative value for never.
    double start_fraction(int i, int j, int c) const;

    bool intervene(const Node& node, int c, std::int64_t k, std::int64_t n) const;
};

class ContagionState {
public:
    explicit ContagionState(const NodePopulation& pop);

    const NodePopulation& population() const { return *pop_; }
    int equity(int v) const { return equity_[v]; }
    int revealed(int v) const { return revealed_[v]; }
    bool defaulted(int v) const { return defaulted_[v] != 0; }
    std::int64_t hidden() const { return hidden_; }
    std::int64_t steps() const { return k_; }
    std::int64_t interventions() const { return interventions_; }
    std::int64_t defaults() const { return defaults_; }
    std::int64_t initial_defaults() const { return initial_defaults_; }
    const InStubPool& pool() const { return pool_; }

private:
    friend void step(ContagionState&, const InterventionPolicy&, RandomStream&);

    const NodePopulation* pop_;
    std::vector<int> equity_;
    std::vector<int> revealed_;
    std::vector<char> defaulted_;
    InStubPool pool_;
    std::int64_t hidden_ = 0;
    std::int64_t k_ = 0;
    std::int64_t interventions_ = 0;
    std::int64_t defaults_ = 0;
    std::int64_t initial_defaults_ = 0;
};

/// Reveals one hidden out-link of the default set. Throws std::logic_error when none is left.
void step(ContagionState& state, const InterventionPolicy& policy, RandomStream& rng);

/// (i, j, c, l) for surviving nodes that started vulnerable (0 < c <= i).
using StateKey = std::array<int, 4>;
using StateAggregate = std::map<StateKey, std::int64_t>;

StateAggregate aggregate(const ContagionState& state);

struct Snapshot {
    double tau = 0.0;
    std::int64_t k = 0;
    StateAggregate states;
};

struct TraceRow {
    std::int64_t k = 0;
    std::int64_t defaults = 0;
    std::int64_t interventions = 0;
    std::int64_t hidden = 0;
};

struct RunOptions {
    std::vector<double> snapshot_times;  ///< scaled times tau; sampled at step floor(tau * n)
    bool trace = false;
};

struct RunOutcome {
    std::int64_t T = 0;
    std::int64_t IT = 0;
    std::int64_t D = 0;
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::int64_t initial_defaults = 0;
    std::vector<Snapshot> snapshots;
    std::vector<TraceRow> trace;

    double objective(double K) const { return (K * IT + D) / static_cast<double>(n); }
};

RunOutcome run(const NodePopulation& pop, const InterventionPolicy& policy, RandomStream& rng,
               const RunOptions& options = {});

struct Expectation {
    double D = 0.0;
    double IT = 0.0;
    double T = 0.0;
};

/**
 * Exact (E[D], E[IT], E[T]) averaging over all stub matchings and, within each,
 * over all uniformly random reveal orders. Throws RefusalError when m > 10.
 */
Expectation exact_expectation(const NodePopulation& pop, const InterventionPolicy& policy);

} // namespace cascade
