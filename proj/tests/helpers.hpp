// Shared test utilities: fixture loading, random biconnected graphs, and the
// brute-force oracles that implementation results are frozen against. The
// oracles deliberately share no code with the library algorithms.
#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "emrc/configgen.hpp"
#include "emrc/routing.hpp"
#include "emrc/topology.hpp"

namespace emrc::test {

inline std::string fixture_path(const std::string& name) {
    return std::string(EMRC_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing fixture ", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Graph load_fixture(const std::string& name) {
    return parse_topology(read_file(fixture_path(name)));
}

// Undirected builders; weight w both directions.
inline std::vector<Link> mirrored(std::vector<std::tuple<NodeId, NodeId, Weight>> pairs) {
    std::vector<Link> links;
    for (auto [u, v, w] : pairs) {
        links.push_back({u, v, w});
        links.push_back({v, u, w});
    }
    return links;
}

inline Graph make_ring(std::size_t n, Weight w = 1) {
    std::vector<std::tuple<NodeId, NodeId, Weight>> pairs;
    for (NodeId i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n, w);
    return Graph::from_parts(n, mirrored(std::move(pairs)));
}

inline Graph make_complete(std::size_t n, Weight w = 1) {
    std::vector<std::tuple<NodeId, NodeId, Weight>> pairs;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j, w);
    }
    return Graph::from_parts(n, mirrored(std::move(pairs)));
}

// Random cycle through all nodes (always biconnected) plus random chords.
inline Graph random_biconnected(std::mt19937_64& rng, int min_n = 4, int max_n = 10,
                                Weight max_w = 10) {
    std::uniform_int_distribution<int> n_dist(min_n, max_n);
    const std::size_t n = static_cast<std::size_t>(n_dist(rng));
    std::uniform_int_distribution<Weight> w_dist(1, max_w);

    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<bool>> present(n, std::vector<bool>(n, false));
    std::vector<std::tuple<NodeId, NodeId, Weight>> pairs;
    auto add = [&](NodeId u, NodeId v) {
        if (u == v || present[u][v]) return;
        present[u][v] = present[v][u] = true;
        pairs.emplace_back(u, v, w_dist(rng));
    };
    for (std::size_t i = 0; i < n; ++i) add(perm[i], perm[(i + 1) % n]);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (coin(rng) < 0.3) add(u, v);
        }
    }
    return Graph::from_parts(n, mirrored(std::move(pairs)));
}

// ---------------------------------------------------------------------------
// Brute-force biconnectivity: remove each node in turn and re-check
// connectivity of the remainder.

inline bool connected_without(const Graph& g, std::optional<NodeId> removed) {
    const std::size_t n = g.node_count();
    std::size_t expected = n - (removed ? 1 : 0);
    if (expected == 0) return true;
    NodeId start = kNoNode;
    for (NodeId u = 0; u < n; ++u) {
        if (!removed || u != *removed) {
            start = u;
            break;
        }
    }
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack{start};
    seen[start] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (const Link& l : g.adjacency(u)) {
            if (removed && l.to == *removed) continue;
            if (!seen[l.to]) {
                seen[l.to] = true;
                ++reached;
                stack.push_back(l.to);
            }
        }
    }
    return reached == expected;
}

inline bool brute_force_biconnected(const Graph& g) {
    if (g.node_count() < 3) return false;
    if (!connected_without(g, std::nullopt)) return false;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!connected_without(g, v)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Brute-force shortest path: enumerate every simple path and keep the
// minimum weight one, ties broken by lexicographically smallest sequence.

struct BrutePath {
    std::vector<NodeId> nodes;
    Weight weight = 0;
};

inline void enumerate_paths(const Graph& g, const Configuration& c, NodeId at, NodeId dst,
                            std::vector<bool>& used, std::vector<NodeId>& nodes, Weight weight,
                            std::optional<BrutePath>& best) {
    if (at == dst) {
        if (!best || weight < best->weight ||
            (weight == best->weight &&
             std::lexicographical_compare(nodes.begin(), nodes.end(), best->nodes.begin(),
                                          best->nodes.end()))) {
            best = BrutePath{nodes, weight};
        }
        return;
    }
    for (const Link& l : g.adjacency(at)) {
        if (used[l.to]) continue;
        auto w = c.effective_weight(l);
        if (!w) continue;  // isolated link
        used[l.to] = true;
        nodes.push_back(l.to);
        enumerate_paths(g, c, l.to, dst, used, nodes, weight + *w, best);
        nodes.pop_back();
        used[l.to] = false;
    }
}

inline std::optional<BrutePath> brute_force_shortest(const Graph& g, const Configuration& c,
                                                     NodeId u, NodeId v) {
    std::vector<bool> used(g.node_count(), false);
    std::vector<NodeId> nodes{u};
    used[u] = true;
    std::optional<BrutePath> best;
    enumerate_paths(g, c, u, v, used, nodes, 0, best);
    return best;
}

inline Configuration plain_config(const Graph& g) {
    Configuration c(0, 1 + [&] {
        Weight s = 0;
        for (const Link& l : g.links()) s += l.weight;
        return s;
    }());
    for (const Link& l : g.links()) {
        if (l.from < l.to) c.set_weight_class(UndirectedLink(l.from, l.to), WeightClass::Normal);
    }
    return c;
}

}  // namespace emrc::test
