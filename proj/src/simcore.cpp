#include "emrc/simcore.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <variant>

#include "emrc/configgen.hpp"
#include "emrc/routing.hpp"

namespace emrc {

namespace {

constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

// ---------------------------------------------------------------------------
// Events

struct ControlPacket {
    bool is_reply = false;
    FailedComponent component;
    NodeId origin = 0;  // detecting router: probe source, reply destination
    NodeId target = 0;  // where this control packet is headed
    int mark = 0;
};

struct EvInject {
    Packet pkt;
};
struct EvArrive {
    Packet pkt;
    NodeId from = 0;
    NodeId to = 0;
};
struct EvCompDown {  // failure declared (detection_delay after death)
    FailedComponent fc;
};
struct EvCompUp {  // physical recovery
    FailedComponent fc;
};
struct EvTimeslot {
    NodeId router = 0;
    FailedComponent fc;
    SimTime deadline = 0;
};
struct EvProbeSend {
    NodeId router = 0;
    FailedComponent fc;
};
struct EvControlArrive {
    ControlPacket cp;
    NodeId from = 0;
    NodeId to = 0;
};
struct EvLinkProbeReply {
    NodeId router = 0;
    FailedComponent fc;
};
struct EvReconvDeadline {
    NodeId router = 0;
    FailedComponent fc;
};

using EventBody = std::variant<EvInject, EvArrive, EvCompDown, EvCompUp, EvTimeslot, EvProbeSend,
                               EvControlArrive, EvLinkProbeReply, EvReconvDeadline>;

struct Event {
    SimTime at = 0;
    std::uint64_t seq = 0;  // insertion sequence; makes ordering total
    EventBody body;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.at, a.seq) > std::tie(b.at, b.seq);
    }
};

// ---------------------------------------------------------------------------
// Engine

class Engine {
public:
    explicit Engine(const Scenario& sc) : sc_(sc) {}

    SimResult run();

private:
    // --- physical status -------------------------------------------------
    bool node_up(NodeId v, SimTime t) const {
        for (const FailureSpec& f : sc_.failures) {
            if (f.component.kind == FailedComponent::Kind::Node && f.component.a == v &&
                f.down_at <= t && t < f.up_at.value_or(kNever)) {
                return false;
            }
        }
        return true;
    }

    // The link's own failure schedule, ignoring endpoint node status.
    bool link_intact(NodeId u, NodeId v, SimTime t) const {
        UndirectedLink key(u, v);
        for (const FailureSpec& f : sc_.failures) {
            if (f.component.kind == FailedComponent::Kind::Link &&
                UndirectedLink(f.component.a, f.component.b) == key && f.down_at <= t &&
                t < f.up_at.value_or(kNever)) {
                return false;
            }
        }
        return true;
    }

    bool link_up(NodeId u, NodeId v, SimTime t) const {
        return node_up(u, t) && node_up(v, t) && link_intact(u, v, t);
    }

    bool component_up(const FailedComponent& fc, SimTime t) const {
        return fc.kind == FailedComponent::Kind::Node ? node_up(fc.a, t)
                                                      : link_up(fc.a, fc.b, t);
    }

    // --- plumbing ---------------------------------------------------------
    ForwardingContext ctx(SimTime now) {
        ForwardingContext c;
        c.cs = &cs_;
        c.tables = &tables_;
        c.generation = generation_;
        c.protection_enabled = protection_enabled_;
        c.link_up = [this, now](NodeId u, NodeId v) { return link_up(u, v, now); };
        c.node_up = [this, now](NodeId v) { return node_up(v, now); };
        c.now = now;
        return c;
    }

    void schedule(SimTime at, EventBody body) {
        queue_.push(Event{at, next_event_seq_++, std::move(body)});
    }

    std::vector<NodeId> adjacent_routers(const FailedComponent& fc) const {
        if (fc.kind == FailedComponent::Kind::Link) return {fc.a, fc.b};
        std::vector<NodeId> out;
        for (const Link& l : sc_.topology.adjacency(fc.a)) out.push_back(l.to);
        return out;
    }

    void log(SimTime at, NodeId node, const FailedComponent& fc, std::string event) {
        result_.log.push_back({at, node, fc.describe(), std::move(event)});
    }

    void record_outcome(const Packet& pkt, SimTime now) {
        PacketRecord& rec = result_.records[pkt.seq];
        rec.resolved_at = now;
        rec.hops = pkt.hops;
        rec.path.clear();
        rec.marks.clear();
        for (const auto& [node, mark] : pkt.hops) {
            rec.path.push_back(node);
            if (rec.marks.empty() || rec.marks.back() != mark) rec.marks.push_back(mark);
        }
        rec.hop_count = rec.path.empty() ? 0 : static_cast<int>(rec.path.size()) - 1;
    }

    void record_delivery(const Packet& pkt, SimTime now) {
        record_outcome(pkt, now);
        result_.records[pkt.seq].delivered_at = now;
    }

    void record_drop(const Packet& pkt, DropReason reason, SimTime now) {
        record_outcome(pkt, now);
        result_.records[pkt.seq].drop_reason = reason;
    }

    void present_packet(Packet pkt, NodeId at, SimTime now) {
        PacketDecision d = routers_[at].on_packet(pkt, ctx(now));
        for (const Packet& evicted : d.overflow) {
            record_drop(evicted, DropReason::HoldOverflow, now);
        }
        switch (d.action.kind) {
            case ForwardAction::Kind::DeliverLocal:
                record_delivery(pkt, now);
                break;
            case ForwardAction::Kind::Forward:
                schedule(now + sc_.link_delay, EvArrive{std::move(pkt), at, d.action.next});
                break;
            case ForwardAction::Kind::Hold:
                break;  // buffered inside the router
            case ForwardAction::Kind::Drop:
                record_drop(pkt, d.action.reason, now);
                break;
        }
    }

    void drain(NodeId router, NodeId neighbor, SimTime now) {
        for (Packet& pkt : routers_[router].take_held(neighbor)) {
            present_packet(std::move(pkt), router, now);
        }
    }

    void drain_all(NodeId router, SimTime now) {
        for (const Link& l : sc_.topology.adjacency(router)) drain(router, l.to, now);
    }

    void forward_control(ControlPacket cp, NodeId at, SimTime now) {
        NodeId next = tables_[static_cast<std::size_t>(cp.mark)].next_hop_or_none(at, cp.target);
        if (next == kNoNode) return;  // target no longer routable; probe lost
        if (!link_up(at, next, now)) return;
        schedule(now + sc_.link_delay, EvControlArrive{std::move(cp), at, next});
    }

    // --- routing view management ------------------------------------------
    void install_initial_routing() {
        if (sc_.n.has_value()) {
            cs_ = generate_configs(sc_.topology, *sc_.n, sc_.seed);
        } else {
            cs_ = generate_configs_auto(sc_.topology, sc_.seed);
        }
        tables_ = build_tables(sc_.topology, cs_);
        result_.backup_config_count = cs_.backup_count();
    }

    void perform_reconvergence(const FailedComponent& fc, SimTime now);

    // --- event handlers -----------------------------------------------------
    void handle(const EvInject& ev, SimTime now) {
        Packet pkt = ev.pkt;
        pkt.generation = generation_;
        pkt.tried_configs = {0};
        result_.records[pkt.seq].injected_at = now;
        if (!node_up(pkt.src, now)) {
            record_drop(pkt, DropReason::SourceDown, now);
            return;
        }
        const NodeId src = pkt.src;
        present_packet(std::move(pkt), src, now);
    }

    void handle(EvArrive ev, SimTime now) {
        // A frame already on the wire still reaches a healthy receiver even
        // if the sender died after transmitting; only the receiving node or
        // the link itself losing the frame matters.
        if (node_up(ev.to, now) && link_intact(ev.from, ev.to, now)) {
            present_packet(std::move(ev.pkt), ev.to, now);
            return;
        }
        if (node_up(ev.from, now)) {
            // Died mid-flight: handled at the upstream (detecting) node.
            present_packet(std::move(ev.pkt), ev.from, now);
            return;
        }
        record_drop(ev.pkt, DropReason::InFlightLoss, now);
    }

    void handle(const EvCompDown& ev, SimTime now) {
        for (NodeId r : adjacent_routers(ev.fc)) {
            const auto& entry = routers_[r].on_component_detected(ev.fc, ctx(now));
            using Phase = RouterState::ComponentMode::Phase;
            if (entry.phase == Phase::Reconverged) continue;
            if (entry.phase == Phase::TimeslotWait) {
                log(now, r, ev.fc, "detected -> timeslot_wait");
                schedule(entry.deadline, EvTimeslot{r, ev.fc, entry.deadline});
            } else {
                log(now, r, ev.fc,
                    "detected -> backup_active cfg=" + std::to_string(entry.config_index));
                drain(r, ev.fc.neighbor_from(r), now);
            }
            schedule(now + routers_[r].timers().t_reconv, EvReconvDeadline{r, ev.fc});
        }
        if (ev.fc.kind == FailedComponent::Kind::Node && !node_up(ev.fc.a, now)) {
            // Whatever the dead router was still holding went down with it.
            for (const Link& l : sc_.topology.adjacency(ev.fc.a)) {
                for (Packet& pkt : routers_[ev.fc.a].take_held(l.to)) {
                    record_drop(pkt, DropReason::InFlightLoss, now);
                }
            }
        }
    }

    void handle(const EvCompUp& ev, SimTime now) {
        for (NodeId r : adjacent_routers(ev.fc)) drain(r, ev.fc.neighbor_from(r), now);
        // A recovered node also re-presents anything still parked locally.
        if (ev.fc.kind == FailedComponent::Kind::Node) drain_all(ev.fc.a, now);
    }

    void handle(const EvTimeslot& ev, SimTime now) {
        const auto* entry = routers_[ev.router].mode_of(ev.fc);
        using Phase = RouterState::ComponentMode::Phase;
        if (entry == nullptr || entry->phase != Phase::TimeslotWait ||
            entry->deadline != ev.deadline) {
            return;  // superseded by a newer detection
        }
        bool live = component_up(ev.fc, now);
        TimeslotOutcome out = routers_[ev.router].on_timeslot_expired(ev.fc, live, ctx(now));
        switch (out) {
            case TimeslotOutcome::Recovered:
                log(now, ev.router, ev.fc, "timeslot_expired -> normal");
                break;
            case TimeslotOutcome::Backup: {
                const auto* m = routers_[ev.router].mode_of(ev.fc);
                log(now, ev.router, ev.fc,
                    "timeslot_expired -> backup_active cfg=" + std::to_string(m->config_index));
                schedule(m->next_probe_at, EvProbeSend{ev.router, ev.fc});
                break;
            }
            case TimeslotOutcome::NoBackup:
                log(now, ev.router, ev.fc, "timeslot_expired -> no_backup");
                break;
            case TimeslotOutcome::Noop:
                return;
        }
        drain(ev.router, ev.fc.neighbor_from(ev.router), now);
    }

    void handle(const EvProbeSend& ev, SimTime now) {
        const auto* entry = routers_[ev.router].mode_of(ev.fc);
        using Phase = RouterState::ComponentMode::Phase;
        if (entry == nullptr || entry->phase != Phase::BackupActive || entry->config_index < 0) {
            return;  // reverted, reconverged or unprotected: stop probing
        }
        log(now, ev.router, ev.fc, "probe_send");
        if (ev.fc.kind == FailedComponent::Kind::Link) {
            // Single-hop hello over the failed link itself.
            if (link_up(ev.fc.a, ev.fc.b, now)) {
                schedule(now + 2 * sc_.link_delay, EvLinkProbeReply{ev.router, ev.fc});
            }
        } else {
            ControlPacket cp{false, ev.fc, ev.router, ev.fc.a, entry->config_index};
            forward_control(std::move(cp), ev.router, now);
        }
        schedule(now + routers_[ev.router].timers().t_probe, EvProbeSend{ev.router, ev.fc});
    }

    void handle(EvControlArrive ev, SimTime now) {
        if (!node_up(ev.to, now) || !link_intact(ev.from, ev.to, now)) return;  // lost
        if (ev.to != ev.cp.target) {
            forward_control(std::move(ev.cp), ev.to, now);
            return;
        }
        if (ev.cp.is_reply) {
            log(now, ev.to, ev.cp.component, "probe_reply -> normal");
            routers_[ev.to].on_probe_reply(ev.cp.component);
            drain(ev.to, ev.cp.component.neighbor_from(ev.to), now);
            return;
        }
        // Probe reached the recovered node: answer the detecting router.
        ControlPacket reply{true, ev.cp.component, ev.cp.origin, ev.cp.origin, ev.cp.mark};
        forward_control(std::move(reply), ev.to, now);
    }

    void handle(const EvLinkProbeReply& ev, SimTime now) {
        if (!link_up(ev.fc.a, ev.fc.b, now)) return;  // failed again during the hello
        log(now, ev.router, ev.fc, "probe_reply -> normal");
        routers_[ev.router].on_probe_reply(ev.fc);
        drain(ev.router, ev.fc.neighbor_from(ev.router), now);
    }

    void handle(const EvReconvDeadline& ev, SimTime now) {
        bool live = component_up(ev.fc, now);
        if (!routers_[ev.router].on_reconvergence_deadline(ev.fc, live, now)) return;
        log(now, ev.router, ev.fc, "reconvergence_request");
        perform_reconvergence(ev.fc, now);
    }

    // --- scenario setup ----------------------------------------------------
    void schedule_initial_events() {
        std::uint64_t seq = 0;
        for (const FlowSpec& flow : sc_.flows) {
            for (int i = 0; i < flow.count; ++i) {
                Packet pkt;
                pkt.seq = seq;
                pkt.src = flow.src;
                pkt.dst = flow.dst;
                PacketRecord rec;
                rec.seq = seq;
                rec.src = flow.src;
                rec.dst = flow.dst;
                result_.records.push_back(rec);
                schedule(flow.start + static_cast<SimTime>(i) * flow.interval,
                         EvInject{std::move(pkt)});
                ++seq;
            }
        }
        for (const FailureSpec& f : sc_.failures) {
            SimTime detect_at = f.down_at + sc_.detection_delay;
            if (f.up_at.value_or(kNever) > detect_at) {
                schedule(detect_at, EvCompDown{f.component});
            }
            if (f.up_at) schedule(*f.up_at, EvCompUp{f.component});
        }
    }

    const Scenario& sc_;
    SimResult result_;

    ConfigurationSet cs_;
    std::vector<ForwardingTable> tables_;
    int generation_ = 0;
    bool protection_enabled_ = true;

    std::vector<RouterState> routers_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_event_seq_ = 0;
    std::set<FailedComponent> reconverged_;
};

void Engine::perform_reconvergence(const FailedComponent& fc, SimTime now) {
    if (reconverged_.count(fc)) {
        for (RouterState& r : routers_) r.mark_reconverged(fc);
        return;
    }
    reconverged_.insert(fc);
    result_.reconverged = true;

    // Build the altered topology with dense ids, remembering the mapping.
    // Every component removed by an earlier re-convergence stays removed.
    const std::size_t n = sc_.topology.node_count();
    auto removed_node = [&](NodeId v) {
        return reconverged_.count(FailedComponent::node(v)) != 0;
    };
    std::vector<NodeId> to_sub(n, kNoNode);
    std::vector<NodeId> from_sub;
    for (NodeId v = 0; v < n; ++v) {
        if (removed_node(v)) continue;
        to_sub[v] = static_cast<NodeId>(from_sub.size());
        from_sub.push_back(v);
    }
    std::vector<Link> sub_links;
    for (const Link& l : sc_.topology.links()) {
        if (to_sub[l.from] == kNoNode || to_sub[l.to] == kNoNode) continue;
        if (reconverged_.count(FailedComponent::link(l.from, l.to))) continue;
        sub_links.push_back({to_sub[l.from], to_sub[l.to], l.weight});
    }
    Graph sub = Graph::from_parts(from_sub.size(), std::move(sub_links));

    ConfigurationSet sub_cs;
    bool degraded = false;
    if (is_biconnected(sub)) {
        sub_cs = generate_configs_auto(sub, sc_.seed);
    } else {
        // Only C_0 can be rebuilt; protection is disabled until the next
        // permanent topology change.
        degraded = true;
        Configuration c0(0, 1);
        for (const Link& l : sub.links()) {
            if (l.from < l.to) c0.set_weight_class(UndirectedLink(l.from, l.to),
                                                   WeightClass::Normal);
        }
        sub_cs.w_r = 1;
        sub_cs.configs.push_back(std::move(c0));
    }
    // In the degraded case repeated removals may even have split the
    // topology; destinations without an entry are dropped at lookup time.
    std::vector<ForwardingTable> sub_tables = build_tables(sub, sub_cs, degraded);

    // Translate the rebuilt view back into original node ids.
    ConfigurationSet new_cs;
    new_cs.w_r = sub_cs.w_r;
    for (const Configuration& c : sub_cs.configs) {
        Configuration tc(c.index(), c.w_r());
        for (const auto& [l, cls] : c.link_classes()) {
            tc.set_weight_class(UndirectedLink(from_sub[l.a], from_sub[l.b]), cls);
        }
        for (NodeId u : c.isolated_nodes()) tc.isolate_node(from_sub[u]);
        new_cs.configs.push_back(std::move(tc));
    }
    std::vector<ForwardingTable> new_tables;
    for (const ForwardingTable& t : sub_tables) {
        ForwardingTable tt(t.config_index(), n);
        for (NodeId at = 0; at < sub.node_count(); ++at) {
            for (NodeId dst = 0; dst < sub.node_count(); ++dst) {
                NodeId next = t.next_hop_or_none(at, dst);
                if (next != kNoNode) tt.set(from_sub[at], from_sub[dst], from_sub[next]);
            }
        }
        new_tables.push_back(std::move(tt));
    }

    cs_ = std::move(new_cs);
    tables_ = std::move(new_tables);
    protection_enabled_ = !degraded;
    result_.degraded = result_.degraded || degraded;
    ++generation_;

    for (RouterState& r : routers_) {
        r.mark_reconverged(fc);
        r.rebind_backup_configs(protection_enabled_ ? &cs_ : nullptr);
    }
    log(now, fc.a, fc, degraded ? "reconvergence_done degraded" : "reconvergence_done");
    for (NodeId r = 0; r < n; ++r) drain_all(r, now);
}

SimResult Engine::run() {
    validate_scenario(sc_);
    result_.mode = sc_.mode;
    install_initial_routing();

    routers_.reserve(sc_.topology.node_count());
    for (NodeId v = 0; v < sc_.topology.node_count(); ++v) {
        routers_.emplace_back(v, sc_.timers, sc_.mode);
    }
    schedule_initial_events();

    SimTime last_at = 0;
    std::uint64_t last_seq = 0;
    std::uint64_t processed = 0;
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        // Total-order audit: (time, sequence) must never move backwards.
        if (ev.at < last_at || (ev.at == last_at && ev.seq < last_seq)) {
            throw Error("event loop ordering violated");
        }
        last_at = ev.at;
        last_seq = ev.seq;
        if (++processed > 50'000'000) throw Error("event budget exceeded; scenario diverges");
        std::visit([&](auto& body) { handle(std::move(body), ev.at); }, ev.body);
    }

    result_.summary = summarize(sc_, result_.records);
    return result_;
}

}  // namespace

void validate_scenario(const Scenario& sc) {
    const Graph& g = sc.topology;
    if (g.node_count() == 0) throw ScenarioError("scenario topology is empty");
    if (sc.link_delay <= 0) throw ScenarioError("link_delay must be positive");
    if (sc.detection_delay < 0) throw ScenarioError("detection_delay must be non-negative");
    if (sc.timers.t_slot <= 0 || sc.timers.t_probe <= 0 || sc.timers.t_reconv <= 0) {
        throw ScenarioError("timers must be positive");
    }
    if (sc.timers.t_slot >= sc.timers.t_reconv) {
        throw ScenarioError("t_slot must be smaller than t_reconv");
    }
    if (sc.n.has_value() && *sc.n < 1) throw ScenarioError("n must be >= 1 (or auto)");
    for (const FlowSpec& f : sc.flows) {
        if (!g.has_node(f.src) || !g.has_node(f.dst)) {
            throw ScenarioError("flow references unknown node");
        }
        if (f.src == f.dst) throw ScenarioError("flow source equals destination");
        if (f.count < 0) throw ScenarioError("flow count must be non-negative");
        if (f.count > 1 && f.interval <= 0) throw ScenarioError("flow interval must be positive");
        if (f.start < 0) throw ScenarioError("flow start must be non-negative");
    }
    for (std::size_t i = 0; i < sc.failures.size(); ++i) {
        const FailureSpec& f = sc.failures[i];
        if (f.component.kind == FailedComponent::Kind::Node) {
            if (!g.has_node(f.component.a)) {
                throw UnknownComponent("failure references unknown node " +
                                       std::to_string(f.component.a));
            }
        } else {
            if (g.find_link(f.component.a, f.component.b) == nullptr) {
                throw UnknownComponent("failure references unknown " + f.component.describe());
            }
        }
        if (f.down_at < 0) throw ScenarioError("failure down_at must be non-negative");
        if (f.up_at && *f.up_at <= f.down_at) {
            throw ScenarioError("failure up_at must be after down_at");
        }
        for (std::size_t k = i + 1; k < sc.failures.size(); ++k) {
            const FailureSpec& o = sc.failures[k];
            if (o.component != f.component) continue;
            SimTime f_end = f.up_at.value_or(kNever);
            SimTime o_end = o.up_at.value_or(kNever);
            if (f.down_at < o_end && o.down_at < f_end) {
                throw ScenarioError("overlapping failure intervals for " +
                                    f.component.describe());
            }
        }
    }
}

Scenario scenario_from_json(const nlohmann::json& j,
                            const std::function<Graph(const std::string&)>& load_topology) {
    Scenario sc;
    if (j.contains("name")) sc.name = j.at("name").get<std::string>();
    if (!j.contains("topology")) throw ScenarioError("scenario needs a 'topology' path");
    sc.topology = load_topology(j.at("topology").get<std::string>());
    if (j.contains("mode")) {
        std::string m = j.at("mode").get<std::string>();
        if (m == "emrc") {
            sc.mode = ProtocolMode::Emrc;
        } else if (m == "mrc") {
            sc.mode = ProtocolMode::Mrc;
        } else {
            throw ScenarioError("unknown mode '" + m + "'");
        }
    }
    if (j.contains("n") && !j.at("n").is_null()) {
        if (j.at("n").is_string()) {
            if (j.at("n").get<std::string>() != "auto") {
                throw ScenarioError("n must be an integer or \"auto\"");
            }
        } else {
            sc.n = j.at("n").get<int>();
        }
    }
    if (j.contains("timers")) {
        const auto& t = j.at("timers");
        if (t.contains("t_slot")) sc.timers.t_slot = t.at("t_slot").get<SimTime>();
        if (t.contains("t_probe")) sc.timers.t_probe = t.at("t_probe").get<SimTime>();
        if (t.contains("t_reconv")) sc.timers.t_reconv = t.at("t_reconv").get<SimTime>();
    }
    if (j.contains("link_delay")) sc.link_delay = j.at("link_delay").get<SimTime>();
    if (j.contains("detection_delay")) {
        sc.detection_delay = j.at("detection_delay").get<SimTime>();
    }
    if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jf : j.value("flows", nlohmann::json::array())) {
        FlowSpec f;
        f.src = jf.at("src").get<NodeId>();
        f.dst = jf.at("dst").get<NodeId>();
        f.interval = jf.value("interval", f.interval);
        f.count = jf.at("count").get<int>();
        f.start = jf.value("start", f.start);
        sc.flows.push_back(f);
    }
    for (const auto& jf : j.value("failures", nlohmann::json::array())) {
        FailureSpec f;
        const auto& jc = jf.at("component");
        std::string kind = jc.at("kind").get<std::string>();
        if (kind == "node") {
            f.component = FailedComponent::node(jc.at("id").get<NodeId>());
        } else if (kind == "link") {
            f.component = FailedComponent::link(jc.at("u").get<NodeId>(), jc.at("v").get<NodeId>());
        } else {
            throw ScenarioError("unknown component kind '" + kind + "'");
        }
        f.down_at = jf.at("down_at").get<SimTime>();
        if (jf.contains("up_at") && !jf.at("up_at").is_null()) {
            f.up_at = jf.at("up_at").get<SimTime>();
        }
        sc.failures.push_back(f);
    }
    return sc;
}

SimSummary summarize(const Scenario& sc, const std::vector<PacketRecord>& records) {
    SimSummary s;
    SimTime first_down = kNever;
    SimTime last_up = 0;
    bool all_recover = !sc.failures.empty();
    for (const FailureSpec& f : sc.failures) {
        first_down = std::min(first_down, f.down_at);
        if (f.up_at) {
            last_up = std::max(last_up, *f.up_at);
        } else {
            all_recover = false;
        }
    }

    auto phase_of = [&](SimTime injected) -> PhaseStats* {
        if (sc.failures.empty() || injected < first_down) return &s.pre_failure;
        if (all_recover && injected >= last_up) return &s.post_recovery;
        return &s.during_failure;
    };

    std::uint64_t hop_total = 0;
    SimTime latency_total = 0;
    std::vector<SimTime> phase_latency(3, 0);
    PhaseStats* phases[3] = {&s.pre_failure, &s.during_failure, &s.post_recovery};

    for (const PacketRecord& r : records) {
        ++s.injected;
        PhaseStats* ph = phase_of(r.injected_at);
        ++ph->injected;
        if (r.delivered()) {
            ++s.delivered;
            ++ph->delivered;
            latency_total += r.latency();
            hop_total += static_cast<std::uint64_t>(r.hop_count);
            for (int i = 0; i < 3; ++i) {
                if (phases[i] == ph) phase_latency[i] += r.latency();
            }
        } else if (r.drop_reason) {
            ++s.dropped;
            ++ph->dropped;
        }
    }
    if (s.delivered > 0) {
        s.mean_latency = static_cast<double>(latency_total) / static_cast<double>(s.delivered);
        s.mean_hop_count = static_cast<double>(hop_total) / static_cast<double>(s.delivered);
    }
    for (int i = 0; i < 3; ++i) {
        if (phases[i]->delivered > 0) {
            phases[i]->mean_latency = static_cast<double>(phase_latency[i]) /
                                      static_cast<double>(phases[i]->delivered);
        }
    }
    return s;
}

SimResult run(const Scenario& sc) {
    Engine engine(sc);
    return engine.run();
}

std::pair<SimResult, SimResult> run_comparison(const Scenario& sc) {
    Scenario mrc = sc;
    mrc.mode = ProtocolMode::Mrc;
    Scenario emrc = sc;
    emrc.mode = ProtocolMode::Emrc;
    return {run(mrc), run(emrc)};
}

std::string packets_csv(const SimResult& result) {
    std::ostringstream out;
    out << "seq,injected_at,delivered_at,dropped_reason,latency,hop_count,marks,path\n";
    for (const PacketRecord& r : result.records) {
        out << r.seq << "," << r.injected_at << ",";
        if (r.delivered()) out << *r.delivered_at;
        out << ",";
        if (r.drop_reason) out << to_string(*r.drop_reason);
        out << ",";
        if (r.delivered()) out << r.latency();
        out << "," << r.hop_count << ",";
        for (std::size_t i = 0; i < r.marks.size(); ++i) {
            if (i) out << "|";
            out << r.marks[i];
        }
        out << ",";
        for (std::size_t i = 0; i < r.path.size(); ++i) {
            if (i) out << "|";
            out << r.path[i];
        }
        out << "\n";
    }
    return out.str();
}

namespace {

nlohmann::json phase_json(const PhaseStats& p) {
    return {{"injected", p.injected},
            {"delivered", p.delivered},
            {"dropped", p.dropped},
            {"mean_latency", p.mean_latency}};
}

}  // namespace

nlohmann::json summary_to_json(const SimResult& result) {
    const SimSummary& s = result.summary;
    nlohmann::json j;
    j["mode"] = to_string(result.mode);
    j["backup_configs"] = result.backup_config_count;
    j["injected"] = s.injected;
    j["delivered"] = s.delivered;
    j["dropped"] = s.dropped;
    j["mean_latency"] = s.mean_latency;
    j["mean_hop_count"] = s.mean_hop_count;
    j["reconverged"] = result.reconverged;
    j["degraded"] = result.degraded;
    j["phases"] = {{"pre_failure", phase_json(s.pre_failure)},
                   {"during_failure", phase_json(s.during_failure)},
                   {"post_recovery", phase_json(s.post_recovery)}};
    return j;
}

std::string delta_csv(const SimResult& mrc, const SimResult& emrc) {
    std::ostringstream out;
    out << "seq,latency_mrc,latency_emrc,delta\n";
    std::size_t count = std::min(mrc.records.size(), emrc.records.size());
    for (std::size_t i = 0; i < count; ++i) {
        const PacketRecord& m = mrc.records[i];
        const PacketRecord& e = emrc.records[i];
        out << m.seq << ",";
        if (m.delivered()) out << m.latency();
        out << ",";
        if (e.delivered()) out << e.latency();
        out << ",";
        if (m.delivered() && e.delivered()) out << (m.latency() - e.latency());
        out << "\n";
    }
    return out.str();
}

}  // namespace emrc
