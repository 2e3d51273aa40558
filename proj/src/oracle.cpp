// Exhaustive cross-check of configuration sets. Deliberately written
// without reusing the generator's helpers: reachability is a plain DFS over
// the rules as stated, and coverage is recounted from scratch.

#include <vector>

#include "emrc/configgen.hpp"
#include "emrc/topology.hpp"

namespace emrc {

namespace {

// Depth-first search for any path u -> v of finite weight whose interior
// nodes are all non-isolated and which crosses no isolated link.
bool path_exists(const Graph& g, const Configuration& c, NodeId u, NodeId v,
                 std::vector<bool>& visited) {
    if (u == v) return true;
    visited[u] = true;
    for (const Link& l : g.adjacency(u)) {
        if (c.weight_class(UndirectedLink(l.from, l.to)) == WeightClass::Isolated) continue;
        if (visited[l.to]) continue;
        if (l.to == v) return true;
        if (c.is_isolated_node(l.to)) continue;  // may not appear in the interior
        if (path_exists(g, c, l.to, v, visited)) return true;
    }
    return false;
}

bool config_structurally_sound(const Graph& g, const Configuration& c) {
    for (NodeId u : c.isolated_nodes()) {
        if (!g.has_node(u)) return false;
        bool has_restricted = false;
        for (const Link& l : g.adjacency(u)) {
            switch (c.weight_class(UndirectedLink(l.from, l.to))) {
                case WeightClass::Normal:
                    return false;  // isolated nodes carry no normal links
                case WeightClass::Restricted:
                    has_restricted = true;
                    break;
                case WeightClass::Isolated:
                    break;
            }
        }
        if (!has_restricted) return false;  // node would be unreachable
    }
    for (const UndirectedLink& l : c.isolated_links()) {
        if (g.find_link(l.a, l.b) == nullptr) return false;
    }
    return true;
}

}  // namespace

bool oracle_validate(const Graph& g, const ConfigurationSet& cs) {
    if (cs.configs.empty()) return false;
    const std::size_t n = g.node_count();

    // C_0 isolates nothing.
    const Configuration& c0 = cs.configs.front();
    if (!c0.isolated_nodes().empty() || !c0.isolated_links().empty()) return false;
    for (const Link& l : g.links()) {
        if (c0.weight_class(UndirectedLink(l.from, l.to)) != WeightClass::Normal) return false;
    }

    for (std::size_t i = 1; i < cs.configs.size(); ++i) {
        const Configuration& c = cs.configs[i];
        if (!config_structurally_sound(g, c)) return false;
        for (NodeId u = 0; u < n; ++u) {
            for (NodeId v = 0; v < n; ++v) {
                if (u == v) continue;
                std::vector<bool> visited(n, false);
                if (!path_exists(g, c, u, v, visited)) return false;
            }
        }
    }

    // Every node and every undirected link isolated exactly once.
    std::vector<int> node_count(n, 0);
    for (std::size_t i = 1; i < cs.configs.size(); ++i) {
        for (NodeId u : cs.configs[i].isolated_nodes()) {
            if (!g.has_node(u)) return false;
            node_count[u]++;
        }
    }
    for (NodeId u = 0; u < n; ++u) {
        if (node_count[u] != 1) return false;
    }

    for (const Link& l : g.links()) {
        if (l.from >= l.to) continue;
        int owners = 0;
        for (std::size_t i = 1; i < cs.configs.size(); ++i) {
            if (cs.configs[i].isolated_links().count(UndirectedLink(l.from, l.to))) ++owners;
        }
        if (owners != 1) return false;
    }
    return true;
}

}  // namespace emrc
