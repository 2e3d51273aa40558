#pragma once

#include <string>
#include <vector>

#include "emrc/configgen.hpp"
#include "emrc/topology.hpp"

namespace emrc {

// A shortest path P_i(u,v): node sequence, link sequence and total weight
// under the owning configuration.
struct Path {
    std::vector<NodeId> nodes;
    std::vector<Link> links;
    Weight total_weight = 0;

    friend bool operator==(const Path&, const Path&) = default;
};

// Destination-indexed next hops for one configuration. Entry (v,v) is
// deliberately absent.
class ForwardingTable {
public:
    ForwardingTable() = default;
    ForwardingTable(int config_index, std::size_t node_count)
        : config_index_(config_index),
          node_count_(node_count),
          next_(node_count * node_count, kNoNode) {}

    int config_index() const { return config_index_; }
    std::size_t node_count() const { return node_count_; }

    NodeId next_hop_or_none(NodeId at, NodeId dst) const {
        if (at >= node_count_ || dst >= node_count_) return kNoNode;
        return next_[at * node_count_ + dst];
    }

    void set(NodeId at, NodeId dst, NodeId next) { next_[at * node_count_ + dst] = next; }

    friend bool operator==(const ForwardingTable&, const ForwardingTable&) = default;

private:
    int config_index_ = 0;
    std::size_t node_count_ = 0;
    std::vector<NodeId> next_;
};

// Minimum-weight path from u to v under W_i, treating isolated links as
// absent. Ties resolve to the lexicographically smallest node sequence.
// Throws UnreachableError when no finite path exists (cannot happen for a
// valid configuration).
Path shortest_path(const Graph& g, const Configuration& c, NodeId u, NodeId v);

// One table per configuration; entry (x,v) is the second node of
// shortest_path(g, c, x, v). Unreachable pairs throw UnreachableError
// (impossible for valid configurations) unless allow_unreachable is set, in
// which case the entry is simply left out.
std::vector<ForwardingTable> build_tables(const Graph& g, const ConfigurationSet& cs,
                                          bool allow_unreachable = false);

// Stored next hop; throws NoRoute when the entry is absent (including
// at == dst).
NodeId next_hop(const ForwardingTable& t, NodeId at, NodeId dst);

// backup.total_weight / original.total_weight. Both paths must share
// endpoints; throws ZeroWeightOriginal for the degenerate equal-endpoint
// case.
double path_stretch(const Path& original, const Path& backup);

// CSV export: config_index,at_node,destination,next_hop.
std::string tables_to_csv(const std::vector<ForwardingTable>& tables);

}  // namespace emrc
