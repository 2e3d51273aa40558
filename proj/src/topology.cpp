#include "emrc/topology.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <utility>

namespace emrc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::int64_t parse_int(std::string_view tok, std::size_t line, const std::string& what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(line, "bad " + what + " '" + std::string(tok) + "'");
    }
    return value;
}

struct RawTopology {
    std::set<NodeId> nodes;
    std::vector<Link> links;
};

void add_link(RawTopology& raw, NodeId u, NodeId v, Weight w, bool mirror, std::size_t line) {
    if (u == v) throw ParseError(line, "self-loop on node " + std::to_string(u));
    if (w <= 0) throw ParseError(line, "non-positive weight " + std::to_string(w));
    if (!raw.nodes.count(u)) throw ParseError(line, "link references undeclared node " + std::to_string(u));
    if (!raw.nodes.count(v)) throw ParseError(line, "link references undeclared node " + std::to_string(v));
    for (const Link& l : raw.links) {
        if (l.from == u && l.to == v) {
            throw ParseError(line, "duplicate link " + std::to_string(u) + " -> " + std::to_string(v));
        }
        if (mirror && l.from == v && l.to == u) {
            throw ParseError(line, "duplicate link " + std::to_string(v) + " -> " + std::to_string(u));
        }
    }
    raw.links.push_back({u, v, w});
    if (mirror) raw.links.push_back({v, u, w});
}

Graph finish(RawTopology raw, bool require_symmetric) {
    if (raw.nodes.empty()) throw ParseError(0, "topology declares no nodes");
    NodeId expect = 0;
    for (NodeId id : raw.nodes) {
        if (id != expect) {
            throw ParseError(0, "node ids must form the dense range [0, n); missing id " +
                                    std::to_string(expect));
        }
        ++expect;
    }
    if (require_symmetric) {
        for (const Link& l : raw.links) {
            bool found = false;
            for (const Link& r : raw.links) {
                if (r.from == l.to && r.to == l.from) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw AsymmetricLink("link " + std::to_string(l.from) + " -> " +
                                     std::to_string(l.to) + " has no reverse link");
            }
        }
    }
    return Graph::from_parts(raw.nodes.size(), std::move(raw.links));
}

}  // namespace

Graph Graph::from_parts(std::size_t node_count, std::vector<Link> links) {
    Graph g;
    g.node_count_ = node_count;
    std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
        return std::pair(a.from, a.to) < std::pair(b.from, b.to);
    });
    for (std::size_t i = 0; i < links.size(); ++i) {
        const Link& l = links[i];
        if (l.from >= node_count || l.to >= node_count) {
            throw UnknownNode("link endpoint outside node range");
        }
        if (l.from == l.to) throw ParseError(0, "self-loop on node " + std::to_string(l.from));
        if (l.weight <= 0) throw ParseError(0, "non-positive link weight");
        if (i > 0 && links[i - 1].from == l.from && links[i - 1].to == l.to) {
            throw ParseError(0, "parallel link " + std::to_string(l.from) + " -> " +
                                    std::to_string(l.to));
        }
        g.w_max_ = std::max(g.w_max_, l.weight);
    }
    g.links_ = std::move(links);
    g.adj_off_.assign(node_count + 1, 0);
    for (const Link& l : g.links_) g.adj_off_[l.from + 1]++;
    for (std::size_t i = 1; i <= node_count; ++i) g.adj_off_[i] += g.adj_off_[i - 1];
    return g;
}

std::span<const Link> Graph::adjacency(NodeId u) const {
    if (!has_node(u)) throw UnknownNode("unknown node " + std::to_string(u));
    return std::span<const Link>(links_.data() + adj_off_[u], adj_off_[u + 1] - adj_off_[u]);
}

const Link* Graph::find_link(NodeId u, NodeId v) const {
    if (!has_node(u)) return nullptr;
    for (const Link& l : adjacency(u)) {
        if (l.to == v) return &l;
    }
    return nullptr;
}

std::span<const Link> adjacency(const Graph& g, NodeId u) {
    return g.adjacency(u);
}

Graph parse_topology(std::string_view text, bool mirror_undirected) {
    std::string_view probe = trim(text);
    if (!probe.empty() && probe.front() == '{') {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) throw ParseError(0, "malformed JSON topology document");
        return topology_from_json(j, mirror_undirected);
    }

    RawTopology raw;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        auto tokens = split_ws(trim(line));
        if (tokens.empty()) continue;

        if (tokens[0] == "node") {
            if (tokens.size() != 2) throw ParseError(line_no, "expected: node <id>");
            std::int64_t id = parse_int(tokens[1], line_no, "node id");
            if (id < 0) throw ParseError(line_no, "negative node id");
            if (!raw.nodes.insert(static_cast<NodeId>(id)).second) {
                throw ParseError(line_no, "duplicate node " + std::to_string(id));
            }
        } else if (tokens[0] == "link") {
            if (tokens.size() != 4) throw ParseError(line_no, "expected: link <u> <v> <weight>");
            std::int64_t u = parse_int(tokens[1], line_no, "node id");
            std::int64_t v = parse_int(tokens[2], line_no, "node id");
            std::int64_t w = parse_int(tokens[3], line_no, "weight");
            if (u < 0 || v < 0) throw ParseError(line_no, "negative node id");
            add_link(raw, static_cast<NodeId>(u), static_cast<NodeId>(v), w, mirror_undirected,
                     line_no);
        } else {
            throw ParseError(line_no, "unknown directive '" + std::string(tokens[0]) + "'");
        }
    }
    return finish(std::move(raw), !mirror_undirected);
}

Graph topology_from_json(const nlohmann::json& j, bool mirror_undirected) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("links")) {
        throw ParseError(0, "JSON topology must contain 'nodes' and 'links' arrays");
    }
    bool mirror = mirror_undirected;
    if (j.contains("directed")) mirror = !j.at("directed").get<bool>();

    RawTopology raw;
    for (const auto& n : j.at("nodes")) {
        std::int64_t id = n.is_object() ? n.at("id").get<std::int64_t>() : n.get<std::int64_t>();
        if (id < 0) throw ParseError(0, "negative node id in JSON topology");
        if (!raw.nodes.insert(static_cast<NodeId>(id)).second) {
            throw ParseError(0, "duplicate node " + std::to_string(id));
        }
    }
    for (const auto& l : j.at("links")) {
        std::int64_t u = l.at("from").get<std::int64_t>();
        std::int64_t v = l.at("to").get<std::int64_t>();
        std::int64_t w = l.at("weight").get<std::int64_t>();
        if (u < 0 || v < 0) throw ParseError(0, "negative node id in JSON topology");
        add_link(raw, static_cast<NodeId>(u), static_cast<NodeId>(v), w, mirror, 0);
    }
    return finish(std::move(raw), !mirror);
}

std::string serialize_topology(const Graph& g) {
    bool symmetric = true;
    for (const Link& l : g.links()) {
        const Link* rev = g.find_link(l.to, l.from);
        if (rev == nullptr || rev->weight != l.weight) {
            symmetric = false;
            break;
        }
    }
    std::ostringstream out;
    for (NodeId u = 0; u < g.node_count(); ++u) out << "node " << u << "\n";
    for (const Link& l : g.links()) {
        if (symmetric && l.from > l.to) continue;  // one line per undirected pair
        out << "link " << l.from << " " << l.to << " " << l.weight << "\n";
    }
    return out.str();
}

nlohmann::json topology_to_json(const Graph& g) {
    nlohmann::json j;
    j["directed"] = true;
    j["nodes"] = nlohmann::json::array();
    for (NodeId u = 0; u < g.node_count(); ++u) j["nodes"].push_back(u);
    j["links"] = nlohmann::json::array();
    for (const Link& l : g.links()) {
        j["links"].push_back({{"from", l.from}, {"to", l.to}, {"weight", l.weight}});
    }
    return j;
}

BiconnectivityReport check_biconnectivity(const Graph& g) {
    BiconnectivityReport report;
    const std::size_t n = g.node_count();
    if (n == 0) return report;

    // Connectivity over the undirected view.
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (const Link& l : g.adjacency(u)) {
            if (!seen[l.to]) {
                seen[l.to] = true;
                ++reached;
                stack.push_back(l.to);
            }
        }
    }
    report.connected = reached == n;
    if (!report.connected) return report;

    // Iterative articulation-point search (DFS lowpoints).
    std::vector<int> disc(n, -1), low(n, 0), parent(n, -1);
    std::vector<std::size_t> child_it(n, 0);
    int timer = 0;
    std::vector<NodeId> dfs;
    dfs.push_back(0);
    disc[0] = low[0] = timer++;
    int root_children = 0;
    while (!dfs.empty()) {
        NodeId u = dfs.back();
        auto adj = g.adjacency(u);
        if (child_it[u] < adj.size()) {
            NodeId v = adj[child_it[u]++].to;
            if (disc[v] == -1) {
                parent[v] = static_cast<int>(u);
                disc[v] = low[v] = timer++;
                if (u == 0) ++root_children;
                dfs.push_back(v);
            } else if (static_cast<int>(v) != parent[u]) {
                low[u] = std::min(low[u], disc[v]);
            }
        } else {
            dfs.pop_back();
            if (!dfs.empty()) {
                NodeId p = dfs.back();
                low[p] = std::min(low[p], low[u]);
                if (p != 0 && low[u] >= disc[p] && !report.articulation) {
                    report.articulation = p;
                }
            }
        }
    }
    if (root_children > 1) report.articulation = 0;
    report.biconnected = n >= 3 && !report.articulation;
    return report;
}

bool is_biconnected(const Graph& g) {
    return check_biconnectivity(g).biconnected;
}

}  // namespace emrc
