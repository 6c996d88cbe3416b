#pragma once

#include "cascade/distribution.hpp"
#include "cascade/random.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace cascade {

struct Node {
    int in = 0;      ///< in-degree: loans received from the network, i.e. exposures
    int out = 0;     ///< out-degree
    int equity = 0;  ///< initial equity in loan units
};

class NodePopulation {
public:
    NodePopulation() = default;

    /// Nodes in the given order; throws ConstructionError if empty or unbalanced.
    explicit NodePopulation(std::vector<Node> nodes);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& operator[](std::size_t v) const { return nodes_[v]; }
    std::int64_t n() const { return static_cast<std::int64_t>(nodes_.size()); }
    std::int64_t m() const { return m_; }
    int max_in_degree() const { return max_in_; }

private:
    std::vector<Node> nodes_;
    std::int64_t m_ = 0;
    int max_in_ = 0;
};

/// Expands counts into nodes sorted by class.
NodePopulation instantiate(const EmpiricalCounts& counts);

/**
 * Multiset of unmatched in-stubs. Nodes are bucketed by remaining in-stub
 * count; a draw picks a bucket with probability proportional to its stub
 * total and then a node uniformly within it.
 */
class InStubPool {
public:
    explicit InStubPool(const NodePopulation& pop);

    /// Consumes one in-stub and returns its node; throws std::logic_error if empty.
    int draw(RandomStream& rng);

    std::int64_t remaining() const { return remaining_; }
    int remaining(int node) const { return left_[node]; }

private:
    void move_down(int node);

    std::vector<std::vector<int>> buckets_;  // buckets_[r]: nodes with r stubs left
    std::vector<int> position_;
    std::vector<int> left_;
    std::int64_t remaining_ = 0;
};

/// Link (source, target): the source lends to the target, whose default hits the source.
struct Matching {
    std::vector<std::pair<int, int>> links;
};

/// Largest stub count accepted by the exhaustive enumerators.
inline constexpr std::int64_t kMaxEnumerationStubs = 10;

/**
 * Visits all m! orderings of in-stubs against the out-stubs taken in node
 * order. Throws RefusalError when m exceeds kMaxEnumerationStubs.
 */
void enumerate_matchings(const NodePopulation& pop, const std::function<void(const Matching&)>& visit);
std::vector<Matching> enumerate_matchings(const NodePopulation& pop);

} // namespace cascade
