#include "emrc/forwarding.hpp"

#include <algorithm>

namespace emrc {

const char* to_string(ProtocolMode m) {
    return m == ProtocolMode::Emrc ? "emrc" : "mrc";
}

const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::LoopDetected: return "loop_detected";
        case DropReason::SecondFailureSameConfig: return "second_failure_same_config";
        case DropReason::HoldOverflow: return "hold_overflow";
        case DropReason::DestinationDown: return "destination_down";
        case DropReason::NoBackupConfig: return "no_backup_config";
        case DropReason::SourceDown: return "source_down";
        case DropReason::InFlightLoss: return "in_flight_loss";
    }
    return "?";
}

int select_backup_config(const ConfigurationSet& cs, const FailedComponent& fc) {
    for (std::size_t i = 1; i < cs.configs.size(); ++i) {
        const Configuration& c = cs.configs[i];
        if (fc.kind == FailedComponent::Kind::Node) {
            if (c.is_isolated_node(fc.a)) return c.index();
        } else {
            if (c.isolated_links().count(UndirectedLink(fc.a, fc.b))) return c.index();
        }
    }
    throw NoBackupConfig("no configuration isolates " + fc.describe());
}

const RouterState::ComponentMode* RouterState::mode_of(const FailedComponent& fc) const {
    auto it = components_.find(fc);
    return it == components_.end() ? nullptr : &it->second;
}

const RouterState::ComponentMode* RouterState::governing_entry(NodeId next,
                                                               FailedComponent* which) const {
    // A down node explains the link loss too, so the node entry wins.
    if (const ComponentMode* m = mode_of(FailedComponent::node(next))) {
        if (m->phase != ComponentMode::Phase::Reconverged) {
            if (which) *which = FailedComponent::node(next);
            return m;
        }
    }
    if (const ComponentMode* m = mode_of(FailedComponent::link(node_, next))) {
        if (m->phase != ComponentMode::Phase::Reconverged) {
            if (which) *which = FailedComponent::link(node_, next);
            return m;
        }
    }
    return nullptr;
}

ForwardAction RouterState::decide(Packet& pkt, const ForwardingContext& ctx) {
    // Marks from before a re-convergence refer to retired tables.
    if (pkt.generation != ctx.generation) {
        pkt.generation = ctx.generation;
        pkt.mark = 0;
        pkt.tried_configs = {0};
    }

    // Visit trace: one entry per (node, mark) visit; a repeat is a loop.
    if (pkt.hops.empty() || pkt.hops.back().first != node_) {
        auto visit = std::make_pair(node_, pkt.mark);
        if (std::find(pkt.hops.begin(), pkt.hops.end(), visit) != pkt.hops.end()) {
            return {ForwardAction::Kind::Drop, kNoNode, pkt.mark, -1, DropReason::LoopDetected};
        }
        pkt.hops.push_back(visit);
    }

    if (node_ == pkt.dst) {
        return {ForwardAction::Kind::DeliverLocal, kNoNode, pkt.mark, -1, {}};
    }

    // Re-marking can cascade when several failures are known; bounded by the
    // tried_configs growth.
    for (;;) {
        NodeId next = (*ctx.tables)[pkt.mark].next_hop_or_none(node_, pkt.dst);
        if (next == kNoNode) {
            // Destination is no longer part of the routed topology.
            return {ForwardAction::Kind::Drop, kNoNode, pkt.mark, -1,
                    DropReason::DestinationDown};
        }

        FailedComponent fc;
        const ComponentMode* entry = governing_entry(next, &fc);

        if (entry && entry->phase == ComponentMode::Phase::BackupActive) {
            if (entry->config_index < 0) {
                // Protection unavailable (degraded set); deliverable only if
                // the component recovered.
                if (ctx.link_up(node_, next)) {
                    return {ForwardAction::Kind::Forward, next, pkt.mark, -1, {}};
                }
                return {ForwardAction::Kind::Drop, kNoNode, pkt.mark, -1,
                        DropReason::NoBackupConfig};
            }
            if (fc.kind == FailedComponent::Kind::Node && fc.a == pkt.dst) {
                // No configuration helps when the destination itself is down.
                if (ctx.link_up(node_, next)) {
                    return {ForwardAction::Kind::Forward, next, pkt.mark, -1, {}};
                }
                return {ForwardAction::Kind::Drop, kNoNode, pkt.mark, -1,
                        DropReason::DestinationDown};
            }
            int backup = entry->config_index;
            if (pkt.tried_configs.count(backup)) {
                return {ForwardAction::Kind::Drop, kNoNode, pkt.mark, -1,
                        DropReason::SecondFailureSameConfig};
            }
            pkt.mark = backup;
            pkt.tried_configs.insert(backup);
            continue;  // re-resolve the next hop under the new mark
        }

        if (entry && entry->phase == ComponentMode::Phase::TimeslotWait) {
            if (ctx.link_up(node_, next)) {
                // Recovered within the timeslot: original route, original mark.
                return {ForwardAction::Kind::Forward, next, pkt.mark, -1, {}};
            }
            return {ForwardAction::Kind::Hold, next, pkt.mark, entry->deadline, {}};
        }

        // No active entry for this neighbor.
        if (ctx.link_up(node_, next)) {
            return {ForwardAction::Kind::Forward, next, pkt.mark, -1, {}};
        }
        if (!ctx.protection_enabled) {
            return {ForwardAction::Kind::Drop, kNoNode, pkt.mark, -1, DropReason::NoBackupConfig};
        }
        // Failure not yet detected: hold until detection or recovery.
        return {ForwardAction::Kind::Hold, next, pkt.mark, -1, {}};
    }
}

PacketDecision RouterState::on_packet(Packet& pkt, const ForwardingContext& ctx) {
    PacketDecision decision;
    decision.action = decide(pkt, ctx);
    if (decision.action.kind == ForwardAction::Kind::Hold) {
        std::deque<Packet>& q = held_[decision.action.next];
        q.push_back(pkt);
        while (q.size() > hold_capacity_) {
            decision.overflow.push_back(std::move(q.front()));
            q.pop_front();
        }
    }
    return decision;
}

const RouterState::ComponentMode& RouterState::on_component_detected(
    const FailedComponent& fc, const ForwardingContext& ctx) {
    auto it = components_.find(fc);
    if (it != components_.end() && it->second.phase == ComponentMode::Phase::Reconverged) {
        return it->second;  // component already routed around permanently
    }
    if (it != components_.end() && it->second.phase == ComponentMode::Phase::BackupActive) {
        it->second.detected_at = ctx.now;  // repeated failure while still on backup
        return it->second;
    }

    ComponentMode entry;
    entry.detected_at = ctx.now;
    if (mode_ == ProtocolMode::Mrc) {
        entry.phase = ComponentMode::Phase::BackupActive;
        try {
            entry.config_index = select_backup_config(*ctx.cs, fc);
        } catch (const NoBackupConfig&) {
            entry.config_index = -1;
        }
    } else {
        entry.phase = ComponentMode::Phase::TimeslotWait;
        entry.deadline = ctx.now + timers_.t_slot;
    }
    return components_[fc] = entry;
}

TimeslotOutcome RouterState::on_timeslot_expired(const FailedComponent& fc, bool live,
                                                 const ForwardingContext& ctx) {
    auto it = components_.find(fc);
    if (it == components_.end() || it->second.phase != ComponentMode::Phase::TimeslotWait) {
        return TimeslotOutcome::Noop;
    }
    if (live) {
        components_.erase(it);
        return TimeslotOutcome::Recovered;
    }
    it->second.phase = ComponentMode::Phase::BackupActive;
    it->second.next_probe_at = ctx.now + timers_.t_probe;
    try {
        it->second.config_index = select_backup_config(*ctx.cs, fc);
    } catch (const NoBackupConfig&) {
        it->second.config_index = -1;
        return TimeslotOutcome::NoBackup;
    }
    return TimeslotOutcome::Backup;
}

void RouterState::on_probe_reply(const FailedComponent& fc) {
    auto it = components_.find(fc);
    if (it == components_.end() || it->second.phase != ComponentMode::Phase::BackupActive) {
        return;  // stale or superseded reply
    }
    components_.erase(it);
}

bool RouterState::on_reconvergence_deadline(const FailedComponent& fc, bool live, SimTime now) {
    auto it = components_.find(fc);
    if (it == components_.end() || it->second.phase != ComponentMode::Phase::BackupActive) {
        return false;
    }
    if (live) return false;  // not a permanent failure after all
    if (now - it->second.detected_at < timers_.t_reconv) return false;
    return true;
}

void RouterState::mark_reconverged(const FailedComponent& fc) {
    ComponentMode entry;
    entry.phase = ComponentMode::Phase::Reconverged;
    components_[fc] = entry;
}

void RouterState::rebind_backup_configs(const ConfigurationSet* cs) {
    for (auto& [fc, entry] : components_) {
        if (entry.phase != ComponentMode::Phase::BackupActive) continue;
        if (cs == nullptr) {
            entry.config_index = -1;
            continue;
        }
        try {
            entry.config_index = select_backup_config(*cs, fc);
        } catch (const NoBackupConfig&) {
            entry.config_index = -1;
        }
    }
}

std::vector<Packet> RouterState::take_held(NodeId neighbor) {
    auto it = held_.find(neighbor);
    if (it == held_.end()) return {};
    std::vector<Packet> out(it->second.begin(), it->second.end());
    held_.erase(it);
    return out;
}

std::size_t RouterState::held_count() const {
    std::size_t total = 0;
    for (const auto& [_, q] : held_) total += q.size();
    return total;
}

}  // namespace emrc
