#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "emrc/configgen.hpp"
#include "emrc/routing.hpp"
#include "emrc/topology.hpp"

namespace emrc {

// Simulated time in integer microsecond ticks.
using SimTime = std::int64_t;

enum class ProtocolMode { Emrc, Mrc };

const char* to_string(ProtocolMode m);

struct Timers {
    SimTime t_slot = 30'000;      // grace period before switching to backup
    SimTime t_probe = 20'000;     // probe interval while on the backup route
    SimTime t_reconv = 1'000'000; // failure age that triggers re-convergence
};

// A failed node or a failed (undirected) link.
struct FailedComponent {
    enum class Kind { Node, Link };
    Kind kind = Kind::Node;
    NodeId a = 0;
    NodeId b = 0;  // unused for nodes

    static FailedComponent node(NodeId v) { return {Kind::Node, v, v}; }
    static FailedComponent link(NodeId u, NodeId v) {
        return {Kind::Link, u < v ? u : v, u < v ? v : u};
    }

    // The neighbor a given adjacent router sees this component behind.
    NodeId neighbor_from(NodeId router) const {
        if (kind == Kind::Node) return a;
        return router == a ? b : a;
    }

    std::string describe() const {
        if (kind == Kind::Node) return "node " + std::to_string(a);
        return "link (" + std::to_string(a) + "," + std::to_string(b) + ")";
    }

    friend auto operator<=>(const FailedComponent&, const FailedComponent&) = default;
};

enum class DropReason {
    LoopDetected,
    SecondFailureSameConfig,
    HoldOverflow,
    DestinationDown,
    NoBackupConfig,
    SourceDown,
    InFlightLoss,  // carrier died with the packet aboard
};

const char* to_string(DropReason r);

// Simulated data packet. config_mark stands in for the DSCP field; values
// are configuration indices 0..n. tried_configs and hops are simulation-side
// metadata used for multi-failure handling and loop auditing.
struct Packet {
    std::uint64_t seq = 0;
    NodeId src = 0;
    NodeId dst = 0;
    int mark = 0;
    int generation = 0;  // forwarding-table generation the mark belongs to
    std::vector<std::pair<NodeId, int>> hops;
    std::set<int> tried_configs;
};

struct ForwardAction {
    enum class Kind { Forward, Hold, Drop, DeliverLocal };

    Kind kind = Kind::Forward;
    NodeId next = kNoNode;            // Forward
    int mark = 0;                     // Forward
    SimTime until = -1;               // Hold: timeslot deadline when known
    DropReason reason = DropReason::LoopDetected;  // Drop
};

// The unique i >= 1 whose configuration isolates the component. Throws
// NoBackupConfig when coverage is broken.
int select_backup_config(const ConfigurationSet& cs, const FailedComponent& fc);

// Everything a router consults when deciding what to do with a packet.
// link_up/node_up report physical status at time `now`.
struct ForwardingContext {
    const ConfigurationSet* cs = nullptr;
    const std::vector<ForwardingTable>* tables = nullptr;
    int generation = 0;
    bool protection_enabled = true;
    std::function<bool(NodeId, NodeId)> link_up;
    std::function<bool(NodeId)> node_up;
    SimTime now = 0;
};

struct PacketDecision {
    ForwardAction action;
    // Packets evicted from a full hold buffer, to be recorded as drops.
    std::vector<Packet> overflow;
};

enum class TimeslotOutcome { Noop, Recovered, Backup, NoBackup };

// Per-router EMRC/MRC forwarding state: one mode entry per known-failed
// adjacent component plus a bounded hold buffer per neighbor. Owned by the
// simulator event loop; never mutated concurrently.
class RouterState {
public:
    struct ComponentMode {
        enum class Phase { TimeslotWait, BackupActive, Reconverged };
        Phase phase = Phase::TimeslotWait;
        SimTime detected_at = 0;
        SimTime deadline = 0;       // TimeslotWait only
        int config_index = -1;      // BackupActive; -1 = no backup available
        SimTime next_probe_at = -1; // BackupActive, EMRC only
    };

    RouterState() = default;
    RouterState(NodeId node, Timers timers, ProtocolMode mode, std::size_t hold_capacity = 64)
        : node_(node), timers_(timers), mode_(mode), hold_capacity_(hold_capacity) {}

    NodeId node() const { return node_; }
    const Timers& timers() const { return timers_; }
    ProtocolMode protocol() const { return mode_; }

    // Decides the fate of a packet at this router. On Hold the packet has
    // been moved into the hold buffer.
    PacketDecision on_packet(Packet& pkt, const ForwardingContext& ctx);

    // Failure detection: the adjacent component fc has been declared down.
    // EMRC opens a timeslot; MRC switches to the backup configuration
    // immediately. Returns the created mode entry.
    const ComponentMode& on_component_detected(const FailedComponent& fc,
                                               const ForwardingContext& ctx);

    TimeslotOutcome on_timeslot_expired(const FailedComponent& fc, bool live,
                                        const ForwardingContext& ctx);

    // Probe answered: stop backup-route transmission for fc. Idempotent.
    void on_probe_reply(const FailedComponent& fc);

    // True when a re-convergence request must be emitted (component still
    // down and past t_reconv while on the backup route).
    bool on_reconvergence_deadline(const FailedComponent& fc, bool live, SimTime now);

    void mark_reconverged(const FailedComponent& fc);

    // After a re-convergence replaced the configuration set, re-resolve the
    // backup index of every still-active entry (nullptr = protection gone).
    void rebind_backup_configs(const ConfigurationSet* cs);

    const ComponentMode* mode_of(const FailedComponent& fc) const;

    // Drains the hold buffer for a neighbor (recovery, timeslot expiry or
    // backup activation re-present these to on_packet).
    std::vector<Packet> take_held(NodeId neighbor);

    std::size_t held_count() const;

private:
    ForwardAction decide(Packet& pkt, const ForwardingContext& ctx);
    const ComponentMode* governing_entry(NodeId next, FailedComponent* which) const;

    NodeId node_ = 0;
    Timers timers_;
    ProtocolMode mode_ = ProtocolMode::Emrc;
    std::size_t hold_capacity_ = 64;
    std::map<FailedComponent, ComponentMode> components_;
    std::map<NodeId, std::deque<Packet>> held_;
};

}  // namespace emrc
