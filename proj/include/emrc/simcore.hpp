#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emrc/forwarding.hpp"
#include "emrc/topology.hpp"

namespace emrc {

struct FlowSpec {
    NodeId src = 0;
    NodeId dst = 0;
    SimTime interval = 10'000;
    int count = 0;
    SimTime start = 0;

    friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

struct FailureSpec {
    FailedComponent component;
    SimTime down_at = 0;
    std::optional<SimTime> up_at;  // nullopt = never recovers

    friend bool operator==(const FailureSpec&, const FailureSpec&) = default;
};

struct Scenario {
    std::string name = "scenario";
    Graph topology;
    ProtocolMode mode = ProtocolMode::Emrc;
    std::optional<int> n;  // backup configuration count; nullopt = auto
    Timers timers;
    SimTime link_delay = 1'000;
    SimTime detection_delay = 10'000;
    std::vector<FlowSpec> flows;
    std::vector<FailureSpec> failures;
    std::uint64_t seed = 0;
};

// Throws ScenarioError / UnknownComponent for malformed scenarios.
void validate_scenario(const Scenario& sc);

// Reads the JSON scenario document. The topology is loaded through the
// supplied callback (the document stores a path in "topology").
Scenario scenario_from_json(const nlohmann::json& j,
                            const std::function<Graph(const std::string&)>& load_topology);

struct PacketRecord {
    std::uint64_t seq = 0;
    NodeId src = 0;
    NodeId dst = 0;
    SimTime injected_at = 0;
    std::optional<SimTime> delivered_at;
    std::optional<DropReason> drop_reason;
    SimTime resolved_at = 0;          // delivery or drop time
    std::vector<NodeId> path;         // nodes that processed the packet
    std::vector<int> marks;           // configuration marks in adoption order
    std::vector<std::pair<NodeId, int>> hops;  // full (node, mark) visit trace
    int hop_count = 0;

    bool delivered() const { return delivered_at.has_value(); }
    SimTime latency() const { return delivered() ? *delivered_at - injected_at : -1; }

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct TransitionLogEntry {
    SimTime at = 0;
    NodeId node = 0;
    std::string component;
    std::string event;

    friend bool operator==(const TransitionLogEntry&, const TransitionLogEntry&) = default;
};

struct PhaseStats {
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    double mean_latency = 0.0;  // over delivered packets

    friend bool operator==(const PhaseStats&, const PhaseStats&) = default;
};

struct SimSummary {
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    double mean_latency = 0.0;
    double mean_hop_count = 0.0;
    PhaseStats pre_failure;
    PhaseStats during_failure;
    PhaseStats post_recovery;

    friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

struct SimResult {
    ProtocolMode mode = ProtocolMode::Emrc;
    int backup_config_count = 0;
    std::vector<PacketRecord> records;
    std::vector<TransitionLogEntry> log;
    SimSummary summary;
    bool reconverged = false;
    bool degraded = false;

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

// Recomputes the summary from per-packet records (also used to cross-check
// the summary shipped inside a SimResult).
SimSummary summarize(const Scenario& sc, const std::vector<PacketRecord>& records);

// Executes the scenario. Deterministic: identical scenarios (including seed)
// produce identical SimResults.
SimResult run(const Scenario& sc);

// Same scenario in both modes with identical seeds; returns (mrc, emrc).
std::pair<SimResult, SimResult> run_comparison(const Scenario& sc);

// seq,injected_at,delivered_at,dropped_reason,latency,hop_count,marks,path
std::string packets_csv(const SimResult& result);

nlohmann::json summary_to_json(const SimResult& result);

// seq,latency_mrc,latency_emrc,delta with one row per packet sequence.
std::string delta_csv(const SimResult& mrc, const SimResult& emrc);

}  // namespace emrc
