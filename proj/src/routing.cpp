#include "emrc/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <sstream>

namespace emrc {

namespace {

constexpr Weight kInf = std::numeric_limits<Weight>::max();

// Distance from every node TO dst under W_i, computed over reversed links so
// asymmetric normal weights are honored.
std::vector<Weight> dist_to_destination(const Graph& g, const Configuration& c, NodeId dst) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<std::pair<NodeId, Weight>>> rev(n);
    for (const Link& l : g.links()) {
        if (auto w = c.effective_weight(l)) rev[l.to].emplace_back(l.from, *w);
    }
    std::vector<Weight> dist(n, kInf);
    using Item = std::pair<Weight, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[dst] = 0;
    heap.emplace(0, dst);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[u]) continue;
        for (auto [p, w] : rev[u]) {
            if (d + w < dist[p]) {
                dist[p] = d + w;
                heap.emplace(dist[p], p);
            }
        }
    }
    return dist;
}

// Smallest next hop that stays on a minimum-weight path toward dst. Walking
// this greedily yields the lexicographically smallest shortest path.
NodeId greedy_next(const Graph& g, const Configuration& c, const std::vector<Weight>& dist,
                   NodeId at) {
    for (const Link& l : g.adjacency(at)) {  // ordered by target id
        auto w = c.effective_weight(l);
        if (!w || dist[l.to] == kInf) continue;
        if (dist[at] == *w + dist[l.to]) return l.to;
    }
    return kNoNode;
}

}  // namespace

Path shortest_path(const Graph& g, const Configuration& c, NodeId u, NodeId v) {
    if (!g.has_node(u) || !g.has_node(v)) throw UnknownNode("shortest_path endpoint unknown");
    Path p;
    p.nodes.push_back(u);
    if (u == v) return p;

    std::vector<Weight> dist = dist_to_destination(g, c, v);
    if (dist[u] == kInf) {
        throw UnreachableError("no finite path " + std::to_string(u) + " -> " + std::to_string(v) +
                               " in configuration " + std::to_string(c.index()));
    }
    NodeId at = u;
    while (at != v) {
        NodeId next = greedy_next(g, c, dist, at);
        if (next == kNoNode) throw UnreachableError("inconsistent distance table");
        const Link* l = g.find_link(at, next);
        p.links.push_back(*l);
        p.nodes.push_back(next);
        p.total_weight += *c.effective_weight(*l);
        at = next;
    }
    return p;
}

std::vector<ForwardingTable> build_tables(const Graph& g, const ConfigurationSet& cs,
                                          bool allow_unreachable) {
    std::vector<ForwardingTable> tables;
    tables.reserve(cs.configs.size());
    const std::size_t n = g.node_count();
    for (const Configuration& c : cs.configs) {
        ForwardingTable t(c.index(), n);
        for (NodeId dst = 0; dst < n; ++dst) {
            std::vector<Weight> dist = dist_to_destination(g, c, dst);
            for (NodeId at = 0; at < n; ++at) {
                if (at == dst) continue;
                if (dist[at] == kInf) {
                    if (allow_unreachable) continue;
                    throw UnreachableError("node " + std::to_string(at) +
                                           " cannot reach " + std::to_string(dst) +
                                           " in configuration " + std::to_string(c.index()));
                }
                t.set(at, dst, greedy_next(g, c, dist, at));
            }
        }
        tables.push_back(std::move(t));
    }
    return tables;
}

NodeId next_hop(const ForwardingTable& t, NodeId at, NodeId dst) {
    NodeId next = t.next_hop_or_none(at, dst);
    if (next == kNoNode) {
        throw NoRoute("no entry for (" + std::to_string(at) + ", " + std::to_string(dst) +
                      ") in configuration " + std::to_string(t.config_index()));
    }
    return next;
}

double path_stretch(const Path& original, const Path& backup) {
    if (original.nodes.empty() || backup.nodes.empty() ||
        original.nodes.front() != backup.nodes.front() ||
        original.nodes.back() != backup.nodes.back()) {
        throw Error("path_stretch requires paths sharing both endpoints");
    }
    if (original.total_weight == 0) {
        throw ZeroWeightOriginal("original path has zero weight (equal endpoints)");
    }
    return static_cast<double>(backup.total_weight) / static_cast<double>(original.total_weight);
}

std::string tables_to_csv(const std::vector<ForwardingTable>& tables) {
    std::ostringstream out;
    out << "config_index,at_node,destination,next_hop\n";
    for (const ForwardingTable& t : tables) {
        for (NodeId at = 0; at < t.node_count(); ++at) {
            for (NodeId dst = 0; dst < t.node_count(); ++dst) {
                NodeId next = t.next_hop_or_none(at, dst);
                if (next == kNoNode) continue;
                out << t.config_index() << "," << at << "," << dst << "," << next << "\n";
            }
        }
    }
    return out.str();
}

}  // namespace emrc
