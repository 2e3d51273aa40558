#include "emrc/configgen.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <queue>

namespace emrc {

const char* to_string(WeightClass c) {
    switch (c) {
        case WeightClass::Normal: return "normal";
        case WeightClass::Restricted: return "restricted";
        case WeightClass::Isolated: return "isolated";
    }
    return "?";
}

std::string to_string(const UndirectedLink& l) {
    return "link (" + std::to_string(l.a) + "," + std::to_string(l.b) + ")";
}

WeightClass Configuration::weight_class(const UndirectedLink& l) const {
    auto it = classes_.find(l);
    return it == classes_.end() ? WeightClass::Normal : it->second;
}

void Configuration::set_weight_class(const UndirectedLink& l, WeightClass c) {
    classes_[l] = c;
    if (c == WeightClass::Isolated) {
        isolated_links_.insert(l);
    } else {
        isolated_links_.erase(l);
    }
}

std::optional<Weight> Configuration::effective_weight(const Link& l) const {
    switch (weight_class(UndirectedLink(l.from, l.to))) {
        case WeightClass::Normal: return l.weight;
        case WeightClass::Restricted: return w_r_;
        case WeightClass::Isolated: return std::nullopt;
    }
    return std::nullopt;
}

namespace {

// Undirected view of the graph used throughout generation: canonical link
// list plus per-node incidence.
struct UGraph {
    std::vector<UndirectedLink> links;
    std::vector<std::vector<std::size_t>> incident;  // node -> indices into links

    explicit UGraph(const Graph& g) {
        for (const Link& l : g.links()) {
            if (l.from < l.to) links.push_back(UndirectedLink(l.from, l.to));
        }
        std::sort(links.begin(), links.end());
        incident.resize(g.node_count());
        for (std::size_t i = 0; i < links.size(); ++i) {
            incident[links[i].a].push_back(i);
            incident[links[i].b].push_back(i);
        }
    }

    NodeId other(std::size_t link_idx, NodeId u) const {
        const UndirectedLink& l = links[link_idx];
        return l.a == u ? l.b : l.a;
    }
};

// Mutable working state for one backup configuration.
struct WorkConfig {
    std::vector<WeightClass> cls;     // per UGraph link index
    std::vector<bool> isolated_node;  // per node

    WorkConfig(std::size_t links, std::size_t nodes)
        : cls(links, WeightClass::Normal), isolated_node(nodes, false) {}
};

// A configuration is internally acceptable when (a) the normal-class links
// connect all non-isolated nodes and (b) every isolated node keeps at least
// one restricted link whose far end is non-isolated. Together these imply
// validity in the is_valid_config sense.
bool config_ok(const UGraph& ug, const WorkConfig& wc) {
    const std::size_t n = wc.isolated_node.size();
    NodeId start = kNoNode;
    std::size_t backbone_count = 0;
    for (NodeId u = 0; u < n; ++u) {
        if (!wc.isolated_node[u]) {
            if (start == kNoNode) start = u;
            ++backbone_count;
        }
    }
    if (backbone_count == 0) return false;

    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack{start};
    seen[start] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (std::size_t li : ug.incident[u]) {
            if (wc.cls[li] != WeightClass::Normal) continue;
            NodeId v = ug.other(li, u);
            if (wc.isolated_node[v] || seen[v]) continue;
            seen[v] = true;
            ++reached;
            stack.push_back(v);
        }
    }
    if (reached != backbone_count) return false;

    for (NodeId u = 0; u < n; ++u) {
        if (!wc.isolated_node[u]) continue;
        bool attached = false;
        for (std::size_t li : ug.incident[u]) {
            if (wc.cls[li] == WeightClass::Restricted && !wc.isolated_node[ug.other(li, u)]) {
                attached = true;
                break;
            }
        }
        if (!attached) return false;
    }
    return true;
}

struct GreedyResult {
    bool ok = false;
    std::string failed_component;
    std::vector<WorkConfig> work;  // one per backup configuration
};

// Link placement with relocation. Isolating every link exactly once is a
// degree-constrained assignment (each isolated endpoint must keep one
// restricted attachment), so a pure greedy pass can strand the final links
// of a cycle. When direct placement fails we search for an augmenting chain:
// evict an already-isolated link from a configuration, take its place, and
// re-place the evicted link elsewhere.
class LinkPlacer {
public:
    LinkPlacer(const UGraph& ug, std::vector<WorkConfig>& work, std::vector<int>& owner)
        : ug_(ug), work_(work), owner_(owner) {}

    bool place(std::size_t li, int start) {
        std::set<std::pair<std::size_t, int>> chain;
        long budget = 200'000;
        return place_impl(li, start, chain, budget);
    }

private:
    int k() const { return static_cast<int>(work_.size()); }

    // Base class of a link when it is not isolated in this configuration.
    WeightClass base_class(std::size_t li, const WorkConfig& wc) const {
        const UndirectedLink& l = ug_.links[li];
        return (wc.isolated_node[l.a] || wc.isolated_node[l.b]) ? WeightClass::Restricted
                                                                : WeightClass::Normal;
    }

    bool isolate_here(std::size_t li, int ci) {
        WorkConfig& wc = work_[ci];
        if (wc.cls[li] == WeightClass::Isolated) return false;
        WeightClass saved = wc.cls[li];
        wc.cls[li] = WeightClass::Isolated;
        if (config_ok(ug_, wc)) {
            owner_[li] = ci + 1;
            return true;
        }
        wc.cls[li] = saved;
        return false;
    }

    // `chain` holds the evictions along the current recursion path only;
    // entries are removed on backtrack so a pair that failed under one
    // search state can be retried under another.
    bool place_impl(std::size_t li, int start, std::set<std::pair<std::size_t, int>>& chain,
                    long& budget) {
        if (--budget < 0) return false;
        for (int t = 0; t < k(); ++t) {
            if (isolate_here(li, (start + t) % k())) return true;
        }
        for (int t = 0; t < k(); ++t) {
            int ci = (start + t) % k();
            WorkConfig& wc = work_[ci];
            for (std::size_t mj = 0; mj < ug_.links.size(); ++mj) {
                if (owner_[mj] != ci + 1 || mj == li) continue;
                if (!chain.insert({mj, ci}).second) continue;
                // Evict mj, try to move in, then re-home mj.
                wc.cls[mj] = base_class(mj, wc);
                owner_[mj] = 0;
                if (isolate_here(li, ci)) {
                    if (place_impl(mj, (ci + 1) % k(), chain, budget)) {
                        chain.erase({mj, ci});
                        return true;
                    }
                    wc.cls[li] = base_class(li, wc);
                    owner_[li] = 0;
                }
                wc.cls[mj] = WeightClass::Isolated;
                owner_[mj] = ci + 1;
                chain.erase({mj, ci});
            }
        }
        return false;
    }

    const UGraph& ug_;
    std::vector<WorkConfig>& work_;
    std::vector<int>& owner_;
};

// Greedy round-robin pass with exactly k backup configurations.
GreedyResult run_greedy(const Graph& g, const UGraph& ug, int k, std::uint64_t seed) {
    GreedyResult res;
    const std::size_t n = g.node_count();
    res.work.assign(static_cast<std::size_t>(k), WorkConfig(ug.links.size(), n));

    // 0 = not isolated anywhere yet; otherwise the owning backup index.
    std::vector<int> link_owner(ug.links.size(), 0);

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return ug.incident[a].size() > ug.incident[b].size();
    });

    const std::uint64_t rotation = seed % static_cast<std::uint64_t>(k);
    std::uint64_t pos = 0;

    auto try_isolate_node = [&](WorkConfig& wc, int cfg_index, NodeId u) -> bool {
        std::vector<std::pair<std::size_t, WeightClass>> touched;
        for (std::size_t li : ug.incident[u]) {
            if (wc.cls[li] == WeightClass::Normal) {
                touched.emplace_back(li, wc.cls[li]);
                wc.cls[li] = WeightClass::Restricted;
            }
        }
        wc.isolated_node[u] = true;

        // Prefer also isolating one attached link that no configuration has
        // claimed yet; fall back to isolating the node alone.
        for (std::size_t li : ug.incident[u]) {
            if (link_owner[li] != 0 || wc.cls[li] == WeightClass::Isolated) continue;
            WeightClass saved = wc.cls[li];
            wc.cls[li] = WeightClass::Isolated;
            if (config_ok(ug, wc)) {
                link_owner[li] = cfg_index;
                return true;
            }
            wc.cls[li] = saved;
        }
        if (config_ok(ug, wc)) return true;

        wc.isolated_node[u] = false;
        for (auto& [li, saved] : touched) wc.cls[li] = saved;
        return false;
    };

    for (NodeId u : order) {
        bool placed = false;
        for (int t = 0; t < k && !placed; ++t) {
            int ci = static_cast<int>((rotation + pos + static_cast<std::uint64_t>(t)) %
                                      static_cast<std::uint64_t>(k));
            placed = try_isolate_node(res.work[ci], ci + 1, u);
        }
        if (!placed) {
            res.failed_component = "node " + std::to_string(u);
            return res;
        }
        ++pos;
    }

    // Second pass: links that no node isolation claimed.
    LinkPlacer placer(ug, res.work, link_owner);
    for (std::size_t li = 0; li < ug.links.size(); ++li) {
        if (link_owner[li] != 0) continue;
        int start = static_cast<int>((rotation + pos) % static_cast<std::uint64_t>(k));
        if (!placer.place(li, start)) {
            res.failed_component = to_string(ug.links[li]);
            return res;
        }
        ++pos;
    }

    res.ok = true;
    return res;
}

Weight restricted_weight(const Graph& g) {
    Weight sum = 0;
    for (const Link& l : g.links()) sum += l.weight;
    return sum + 1;
}

ConfigurationSet assemble(const Graph& g, const UGraph& ug, const std::vector<WorkConfig>& work,
                          int pad_to, Weight w_r) {
    ConfigurationSet cs;
    cs.w_r = w_r;
    Configuration c0(0, w_r);
    for (const UndirectedLink& l : ug.links) c0.set_weight_class(l, WeightClass::Normal);
    cs.configs.push_back(std::move(c0));

    for (std::size_t i = 0; i < work.size(); ++i) {
        Configuration c(static_cast<int>(i) + 1, w_r);
        for (std::size_t li = 0; li < ug.links.size(); ++li) {
            c.set_weight_class(ug.links[li], work[i].cls[li]);
        }
        for (NodeId u = 0; u < g.node_count(); ++u) {
            if (work[i].isolated_node[u]) c.isolate_node(u);
        }
        cs.configs.push_back(std::move(c));
    }
    // Unused configurations keep every link normal and isolate nothing.
    for (int i = static_cast<int>(work.size()); i < pad_to; ++i) {
        Configuration c(i + 1, w_r);
        for (const UndirectedLink& l : ug.links) c.set_weight_class(l, WeightClass::Normal);
        cs.configs.push_back(std::move(c));
    }
    return cs;
}

void verify_generated(const Graph& g, const ConfigurationSet& cs) {
    for (std::size_t i = 1; i < cs.configs.size(); ++i) {
        if (!is_valid_config(g, cs.configs[i]).valid) {
            throw Error("internal: generated configuration " + std::to_string(i) + " is invalid");
        }
    }
    if (!coverage_report(cs, g).exact()) {
        throw Error("internal: generated configuration set has coverage gaps");
    }
}

}  // namespace

ConfigurationSet generate_configs(const Graph& g, int n, std::uint64_t seed) {
    if (n < 1) throw Error("number of backup configurations must be >= 1");
    if (!is_biconnected(g)) throw NotBiconnected("topology is not bi-connected");

    UGraph ug(g);
    const Weight w_r = restricted_weight(g);
    const int k_max = std::min<int>(n, static_cast<int>(g.node_count()));

    std::string first_failure;
    for (int k = k_max; k >= 1; --k) {
        GreedyResult res = run_greedy(g, ug, k, seed);
        if (res.ok) {
            ConfigurationSet cs = assemble(g, ug, res.work, n, w_r);
            verify_generated(g, cs);
            return cs;
        }
        if (first_failure.empty()) first_failure = res.failed_component;
    }
    throw InsufficientConfigurations(n, first_failure);
}

ConfigurationSet generate_configs_auto(const Graph& g, std::uint64_t seed, int* chosen_n) {
    if (!is_biconnected(g)) throw NotBiconnected("topology is not bi-connected");
    UGraph ug(g);
    const Weight w_r = restricted_weight(g);
    std::string last_failure = "node 0";
    for (int k = 1; k <= static_cast<int>(g.node_count()); ++k) {
        GreedyResult res = run_greedy(g, ug, k, seed);
        if (res.ok) {
            if (chosen_n) *chosen_n = k;
            ConfigurationSet cs = assemble(g, ug, res.work, k, w_r);
            verify_generated(g, cs);
            return cs;
        }
        last_failure = res.failed_component;
    }
    throw InsufficientConfigurations(static_cast<int>(g.node_count()), last_failure);
}

ValidityReport is_valid_config(const Graph& g, const Configuration& c) {
    ValidityReport report;
    const std::size_t n = g.node_count();

    // Components of the finite-link subgraph over non-isolated nodes.
    std::vector<int> comp(n, -1);
    int comp_count = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (c.is_isolated_node(s) || comp[s] != -1) continue;
        int id = comp_count++;
        std::vector<NodeId> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (const Link& l : g.adjacency(u)) {
                if (c.is_isolated_node(l.to) || comp[l.to] != -1) continue;
                if (c.weight_class(UndirectedLink(l.from, l.to)) == WeightClass::Isolated) continue;
                comp[l.to] = id;
                stack.push_back(l.to);
            }
        }
    }

    // Non-isolated finite-link neighbors of each node (the node itself when
    // it is not isolated).
    auto anchors = [&](NodeId u) {
        std::vector<NodeId> out;
        if (!c.is_isolated_node(u)) {
            out.push_back(u);
            return out;
        }
        for (const Link& l : g.adjacency(u)) {
            if (c.is_isolated_node(l.to)) continue;
            if (c.weight_class(UndirectedLink(l.from, l.to)) == WeightClass::Isolated) continue;
            out.push_back(l.to);
        }
        return out;
    };

    for (NodeId u = 0; u < n; ++u) {
        std::vector<NodeId> au = anchors(u);
        for (NodeId v = 0; v < n; ++v) {
            if (u == v) continue;
            const Link* direct = g.find_link(u, v);
            if (direct != nullptr &&
                c.weight_class(UndirectedLink(u, v)) != WeightClass::Isolated) {
                continue;  // single-hop path, no interior nodes
            }
            std::vector<NodeId> av = anchors(v);
            bool ok = false;
            for (NodeId bu : au) {
                for (NodeId bv : av) {
                    if (comp[bu] != -1 && comp[bu] == comp[bv]) {
                        ok = true;
                        break;
                    }
                }
                if (ok) break;
            }
            if (!ok) report.violations.emplace_back(u, v);
        }
    }
    report.valid = report.violations.empty();
    return report;
}

CoverageReport coverage_report(const ConfigurationSet& cs, const Graph& g) {
    CoverageReport report;
    report.node_isolated_in.assign(g.node_count(), {});
    for (const Link& l : g.links()) {
        if (l.from < l.to) report.link_isolated_in[UndirectedLink(l.from, l.to)] = {};
    }
    for (std::size_t i = 1; i < cs.configs.size(); ++i) {
        const Configuration& c = cs.configs[i];
        for (NodeId u : c.isolated_nodes()) {
            if (u < g.node_count()) report.node_isolated_in[u].push_back(c.index());
        }
        for (const UndirectedLink& l : c.isolated_links()) {
            report.link_isolated_in[l].push_back(c.index());
        }
    }
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (report.node_isolated_in[u].empty()) report.uncovered_nodes.push_back(u);
        if (report.node_isolated_in[u].size() > 1) report.duplicate_nodes.push_back(u);
    }
    for (const auto& [l, owners] : report.link_isolated_in) {
        if (owners.empty()) report.uncovered_links.push_back(l);
        if (owners.size() > 1) report.duplicate_links.push_back(l);
    }
    return report;
}

Backbone backbone(const Graph& g, const Configuration& c) {
    Backbone b;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!c.is_isolated_node(u)) b.nodes.push_back(u);
    }
    for (const Link& l : g.links()) {
        if (l.from >= l.to) continue;
        if (c.weight_class(UndirectedLink(l.from, l.to)) != WeightClass::Normal) continue;
        if (c.is_isolated_node(l.from) || c.is_isolated_node(l.to)) continue;
        b.links.push_back(UndirectedLink(l.from, l.to));
    }
    if (b.nodes.empty()) throw DisconnectedBackbone("backbone has no nodes");

    std::vector<bool> in_backbone(g.node_count(), false);
    for (NodeId u : b.nodes) in_backbone[u] = true;
    std::vector<std::vector<NodeId>> adj(g.node_count());
    for (const UndirectedLink& l : b.links) {
        adj[l.a].push_back(l.b);
        adj[l.b].push_back(l.a);
    }
    std::vector<bool> seen(g.node_count(), false);
    std::vector<NodeId> stack{b.nodes.front()};
    seen[b.nodes.front()] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    if (reached != b.nodes.size()) {
        throw DisconnectedBackbone("backbone of configuration " + std::to_string(c.index()) +
                                   " is not connected");
    }
    return b;
}

nlohmann::json config_set_to_json(const ConfigurationSet& cs) {
    nlohmann::json j;
    j["w_r"] = cs.w_r;
    j["n"] = cs.backup_count();
    j["configs"] = nlohmann::json::array();
    for (const Configuration& c : cs.configs) {
        nlohmann::json jc;
        jc["index"] = c.index();
        jc["isolated_nodes"] = c.isolated_nodes();
        jc["isolated_links"] = nlohmann::json::array();
        for (const UndirectedLink& l : c.isolated_links()) {
            jc["isolated_links"].push_back({l.a, l.b});
        }
        jc["link_classes"] = nlohmann::json::array();
        for (const auto& [l, cls] : c.link_classes()) {
            jc["link_classes"].push_back({{"u", l.a}, {"v", l.b}, {"class", to_string(cls)}});
        }
        j["configs"].push_back(std::move(jc));
    }
    return j;
}

ConfigurationSet config_set_from_json(const nlohmann::json& j) {
    ConfigurationSet cs;
    cs.w_r = j.at("w_r").get<Weight>();
    for (const auto& jc : j.at("configs")) {
        Configuration c(jc.at("index").get<int>(), cs.w_r);
        for (const auto& jl : jc.at("link_classes")) {
            UndirectedLink l(jl.at("u").get<NodeId>(), jl.at("v").get<NodeId>());
            std::string cls = jl.at("class").get<std::string>();
            if (cls == "normal") {
                c.set_weight_class(l, WeightClass::Normal);
            } else if (cls == "restricted") {
                c.set_weight_class(l, WeightClass::Restricted);
            } else if (cls == "isolated") {
                c.set_weight_class(l, WeightClass::Isolated);
            } else {
                throw ParseError(0, "unknown weight class '" + cls + "'");
            }
        }
        for (const auto& u : jc.at("isolated_nodes")) c.isolate_node(u.get<NodeId>());
        cs.configs.push_back(std::move(c));
    }
    return cs;
}

}  // namespace emrc
