#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emrc/errors.hpp"

namespace emrc {

using NodeId = std::uint32_t;
using Weight = std::int64_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// One directed link (u,v) with its normal-configuration weight.
struct Link {
    NodeId from = 0;
    NodeId to = 0;
    Weight weight = 1;

    friend bool operator==(const Link&, const Link&) = default;
};

// The network topology G = (N, A): dense node ids [0, node_count) and a set
// of directed links. Every parsed graph contains the reverse of each link.
// Immutable after construction; safe to share across threads.
class Graph {
public:
    Graph() = default;

    // Validates and canonicalizes: no self-loops, no parallel links in the
    // same direction, positive weights, endpoints within range. Does not
    // require symmetric pairs; parse-level entry points enforce that.
    static Graph from_parts(std::size_t node_count, std::vector<Link> links);

    std::size_t node_count() const { return node_count_; }
    const std::vector<Link>& links() const { return links_; }

    // A(u): the links leaving node u, ordered by target id.
    std::span<const Link> adjacency(NodeId u) const;

    bool has_node(NodeId u) const { return u < node_count_; }

    // Pointer into links(), or nullptr when (u,v) is absent.
    const Link* find_link(NodeId u, NodeId v) const;

    // Largest normal weight W_max (0 for a linkless graph).
    Weight w_max() const { return w_max_; }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::size_t node_count_ = 0;
    std::vector<Link> links_;           // sorted by (from, to)
    std::vector<std::size_t> adj_off_;  // node_count_+1 offsets into links_
    Weight w_max_ = 0;
};

// Parses the line-oriented topology format or, when the first non-space
// character is '{', a JSON document with "nodes" and "links" arrays.
// With mirror_undirected, each "link u v w" line produces both directions.
Graph parse_topology(std::string_view text, bool mirror_undirected = true);

// Text form of a graph; parse_topology(serialize_topology(g)) == g for
// graphs with symmetric weights. Asymmetric graphs serialize one line per
// directed link and must be re-parsed with mirror_undirected = false.
std::string serialize_topology(const Graph& g);

nlohmann::json topology_to_json(const Graph& g);
Graph topology_from_json(const nlohmann::json& j, bool mirror_undirected = true);

struct BiconnectivityReport {
    bool connected = false;
    // An articulation node, when one exists.
    std::optional<NodeId> articulation;
    bool biconnected = false;
};

BiconnectivityReport check_biconnectivity(const Graph& g);

// True iff the undirected view of g is connected, has >= 3 nodes and no
// articulation point.
bool is_biconnected(const Graph& g);

// Exactly the links with from == u. Throws UnknownNode.
std::span<const Link> adjacency(const Graph& g, NodeId u);

}  // namespace emrc
