#include "cascade/network.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cascade {

NodePopulation::NodePopulation(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ConstructionError("empty population");
    std::int64_t in = 0, out = 0;
    for (const auto& v : nodes_) {
        if (v.in < 0 || v.out < 0 || v.equity < 0) throw ConstructionError("negative node attribute");
        in += v.in;
        out += v.out;
        max_in_ = std::max(max_in_, v.in);
    }
    if (in != out)
        throw ConstructionError("in-stubs (" + std::to_string(in) + ") and out-stubs (" + std::to_string(out) +
                                ") differ");
    m_ = in;
}

NodePopulation instantiate(const EmpiricalCounts& counts) {
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(counts.n));
    for (const auto& [k, cnt] : counts.counts)
        for (std::int64_t r = 0; r < cnt; ++r) nodes.push_back({k.i, k.j, k.c});
    return NodePopulation(std::move(nodes));
}

InStubPool::InStubPool(const NodePopulation& pop)
    : buckets_(pop.max_in_degree() + 1), position_(pop.nodes().size()), left_(pop.nodes().size()) {
    for (std::size_t v = 0; v < pop.nodes().size(); ++v) {
        int r = pop[v].in;
        left_[v] = r;
        remaining_ += r;
        if (r > 0) {
            position_[v] = static_cast<int>(buckets_[r].size());
            buckets_[r].push_back(static_cast<int>(v));
        }
    }
}

int InStubPool::draw(RandomStream& rng) {
    if (remaining_ == 0) throw std::logic_error("draw from an empty in-stub pool");
    auto u = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(remaining_)));
    for (std::size_t r = 1; r < buckets_.size(); ++r) {
        auto weight = static_cast<std::int64_t>(r * buckets_[r].size());
        if (u < weight) {
            int node = buckets_[r][static_cast<std::size_t>(u / static_cast<std::int64_t>(r))];
            move_down(node);
            return node;
        }
        u -= weight;
    }
    throw std::logic_error("in-stub pool bookkeeping is inconsistent");
}

void InStubPool::move_down(int node) {
    int r = left_[node];
    auto& from = buckets_[r];
    int last = from.back();
    from[position_[node]] = last;
    position_[last] = position_[node];
    from.pop_back();
    --left_[node];
    --remaining_;
    if (r - 1 > 0) {
        position_[node] = static_cast<int>(buckets_[r - 1].size());
        buckets_[r - 1].push_back(node);
    }
}

void enumerate_matchings(const NodePopulation& pop, const std::function<void(const Matching&)>& visit) {
    if (pop.m() > kMaxEnumerationStubs)
        throw RefusalError("matching enumeration refused: m = " + std::to_string(pop.m()) + " exceeds " +
                           std::to_string(kMaxEnumerationStubs));
    std::vector<int> out_owner, in_owner;
    for (std::size_t v = 0; v < pop.nodes().size(); ++v) {
        out_owner.insert(out_owner.end(), pop[v].out, static_cast<int>(v));
        in_owner.insert(in_owner.end(), pop[v].in, static_cast<int>(v));
    }
    std::vector<int> perm(in_owner.size());
    std::iota(perm.begin(), perm.end(), 0);
    Matching matching;
    matching.links.resize(perm.size());
    do {
        for (std::size_t k = 0; k < perm.size(); ++k) matching.links[k] = {out_owner[k], in_owner[perm[k]]};
        visit(matching);
    } while (std::next_permutation(perm.begin(), perm.end()));
}

std::vector<Matching> enumerate_matchings(const NodePopulation& pop) {
    std::vector<Matching> all;
    enumerate_matchings(pop, [&](const Matching& mt) { all.push_back(mt); });
    return all;
}

} // namespace cascade
