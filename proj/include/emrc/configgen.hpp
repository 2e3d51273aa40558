#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "emrc/topology.hpp"

namespace emrc {

// Weight class of a link within one configuration. Normal keeps the link's
// C_0 weight; Restricted maps to the set-wide finite value W_r; Isolated is
// an infinity sentinel, never an arithmetic value.
enum class WeightClass : std::uint8_t { Normal, Restricted, Isolated };

const char* to_string(WeightClass c);

// Undirected link key, normalized so a < b. Restricted and isolated weights
// are always applied symmetrically, so configurations classify undirected
// pairs.
struct UndirectedLink {
    NodeId a = 0;
    NodeId b = 0;

    UndirectedLink() = default;
    UndirectedLink(NodeId u, NodeId v) : a(u < v ? u : v), b(u < v ? v : u) {}

    friend auto operator<=>(const UndirectedLink&, const UndirectedLink&) = default;
};

std::string to_string(const UndirectedLink& l);

// One configuration C_i: the weight function W_i expressed as a class per
// undirected link, plus the isolated-node set S_i.
class Configuration {
public:
    Configuration() = default;
    Configuration(int index, Weight w_r) : index_(index), w_r_(w_r) {}

    int index() const { return index_; }
    Weight w_r() const { return w_r_; }

    WeightClass weight_class(const UndirectedLink& l) const;
    void set_weight_class(const UndirectedLink& l, WeightClass c);

    bool is_isolated_node(NodeId u) const { return isolated_nodes_.count(u) != 0; }
    const std::set<NodeId>& isolated_nodes() const { return isolated_nodes_; }
    void isolate_node(NodeId u) { isolated_nodes_.insert(u); }

    const std::set<UndirectedLink>& isolated_links() const { return isolated_links_; }

    // Effective weight of a directed link under W_i, or nullopt for an
    // isolated link (the infinity case).
    std::optional<Weight> effective_weight(const Link& l) const;

    const std::map<UndirectedLink, WeightClass>& link_classes() const { return classes_; }

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    int index_ = 0;
    Weight w_r_ = 0;
    std::map<UndirectedLink, WeightClass> classes_;  // absent == Normal
    std::set<NodeId> isolated_nodes_;
    std::set<UndirectedLink> isolated_links_;
};

// [C_0, C_1, ..., C_n]; configs[0] is the normal configuration.
struct ConfigurationSet {
    std::vector<Configuration> configs;
    Weight w_r = 0;

    int backup_count() const { return static_cast<int>(configs.size()) - 1; }

    friend bool operator==(const ConfigurationSet&, const ConfigurationSet&) = default;
};

struct ValidityReport {
    bool valid = false;
    // Ordered pairs (u,v) with no finite path avoiding isolated interior
    // nodes and isolated links.
    std::vector<std::pair<NodeId, NodeId>> violations;
};

struct CoverageReport {
    // Configuration indices (i >= 1) isolating each node / undirected link.
    std::vector<std::vector<int>> node_isolated_in;
    std::map<UndirectedLink, std::vector<int>> link_isolated_in;
    std::vector<NodeId> uncovered_nodes;
    std::vector<UndirectedLink> uncovered_links;
    std::vector<NodeId> duplicate_nodes;
    std::vector<UndirectedLink> duplicate_links;

    bool exact() const {
        return uncovered_nodes.empty() && uncovered_links.empty() && duplicate_nodes.empty() &&
               duplicate_links.empty();
    }
};

// The backbone B_i: non-isolated nodes plus normal-class links.
struct Backbone {
    std::vector<NodeId> nodes;
    std::vector<UndirectedLink> links;
};

// Generates n backup configurations in which every node and every undirected
// link is isolated exactly once. Greedy round-robin over nodes in descending
// degree order; leftover links are isolated in a second round-robin pass.
// When the greedy pass cannot place every component with exactly n
// configurations it retries with fewer and pads with empty configurations,
// so success at n implies success at n+1.
//
// Throws NotBiconnected or InsufficientConfigurations.
ConfigurationSet generate_configs(const Graph& g, int n, std::uint64_t seed = 0);

// Tries n = 1, 2, ... up to |N| and returns the first success; the chosen n
// is reported through chosen_n when non-null.
ConfigurationSet generate_configs_auto(const Graph& g, std::uint64_t seed = 0,
                                       int* chosen_n = nullptr);

// True iff every ordered node pair is connected by a finite-weight path whose
// interior nodes are all non-isolated and which uses no isolated link.
ValidityReport is_valid_config(const Graph& g, const Configuration& c);

CoverageReport coverage_report(const ConfigurationSet& cs, const Graph& g);

// Throws DisconnectedBackbone when the normal-class subgraph does not span
// all non-isolated nodes.
Backbone backbone(const Graph& g, const Configuration& c);

// Independent exhaustive re-check of validity and coverage. Shares no logic
// with the generator; intended for small graphs (|N| <= 12).
bool oracle_validate(const Graph& g, const ConfigurationSet& cs);

nlohmann::json config_set_to_json(const ConfigurationSet& cs);
ConfigurationSet config_set_from_json(const nlohmann::json& j);

}  // namespace emrc
