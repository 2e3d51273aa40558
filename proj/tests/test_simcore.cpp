#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "emrc/simcore.hpp"
#include "helpers.hpp"

using namespace emrc;

namespace {

Scenario base_scenario(Graph g) {
    Scenario sc;
    sc.topology = std::move(g);
    sc.flows.push_back({1, 0, 5'000, 60, 0});
    return sc;
}

bool all_delivered(const SimResult& r) {
    return std::all_of(r.records.begin(), r.records.end(),
                       [](const PacketRecord& p) { return p.delivered(); });
}

bool any_nonzero_mark(const SimResult& r) {
    return std::any_of(r.records.begin(), r.records.end(), [](const PacketRecord& p) {
        return std::any_of(p.marks.begin(), p.marks.end(), [](int m) { return m != 0; });
    });
}

}  // namespace

TEST_CASE("failure-free run delivers everything over the primary route") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    SimResult r = run(sc);
    CHECK(r.records.size() == 60);
    CHECK(all_delivered(r));
    CHECK_FALSE(any_nonzero_mark(r));
    for (const PacketRecord& p : r.records) {
        CHECK(p.path == std::vector<NodeId>{1, 4, 5, 0});
        CHECK(p.latency() == 3 * sc.link_delay);
    }
    CHECK(r.summary.delivered == 60);
    CHECK(r.summary.dropped == 0);
    CHECK(summarize(sc, r.records) == r.summary);
}

TEST_CASE("failure shorter than the timeslot never leaves the original route") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    const SimTime d = 20'000;  // < t_slot = 30000
    sc.failures.push_back({FailedComponent::node(5), 100'000, 100'000 + d});
    SimResult r = run(sc);

    CHECK(all_delivered(r));
    CHECK_FALSE(any_nonzero_mark(r));
    for (const PacketRecord& p : r.records) {
        CHECK(p.path == std::vector<NodeId>{1, 4, 5, 0});
        // Held packets wait out the failure at the detecting node.
        CHECK(p.latency() <= d + sc.timers.t_slot + 3 * sc.link_delay);
    }
}

TEST_CASE("persistent failure switches to the detour and reverts after the probe reply") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    sc.flows[0].count = 120;
    sc.failures.push_back({FailedComponent::node(5), 100'000, 400'000});
    SimResult r = run(sc);

    CHECK(all_delivered(r));
    int backup = 0;
    for (const auto& e : r.log) {
        if (e.event.rfind("timeslot_expired -> backup_active", 0) == 0) {
            backup = std::stoi(e.event.substr(e.event.find("cfg=") + 4));
        }
    }
    REQUIRE(backup > 0);

    // Find the probe reply that ends the backup period at node 4.
    SimTime reply_at = -1;
    for (const auto& e : r.log) {
        if (e.node == 4 && e.event == "probe_reply -> normal") reply_at = e.at;
    }
    REQUIRE(reply_at > 400'000);
    REQUIRE(reply_at <= 400'000 + sc.timers.t_probe + 4 * sc.link_delay);

    bool saw_detour = false;
    for (const PacketRecord& p : r.records) {
        if (p.marks.size() > 1) {
            // During the outage packets carry the node-5 mark via 4 -> 7 -> 0.
            CHECK(p.marks == std::vector<int>{0, backup});
            CHECK(p.path == std::vector<NodeId>{1, 4, 7, 0});
            saw_detour = true;
        }
        if (p.injected_at > reply_at) {
            // After the revert the original route is back in use.
            CHECK(p.marks == std::vector<int>{0});
            CHECK(p.path == std::vector<NodeId>{1, 4, 5, 0});
        }
    }
    CHECK(saw_detour);
}

TEST_CASE("comparison pairs the two modes on identical scenarios") {
    Scenario sc = base_scenario(test::load_fixture("backup_longer.topo"));
    sc.flows[0].count = 320;  // long post-recovery phase
    sc.failures.push_back({FailedComponent::node(5), 100'000, 400'000});
    auto [mrc, emrc_r] = run_comparison(sc);
    CHECK(mrc.mode == ProtocolMode::Mrc);
    CHECK(emrc_r.mode == ProtocolMode::Emrc);
    CHECK(mrc.records.size() == emrc_r.records.size());

    SUBCASE("short glitch: only MRC uses the backup route") {
        Scenario glitch = base_scenario(test::load_fixture("diamond8.topo"));
        glitch.failures.push_back({FailedComponent::node(5), 100'000, 120'000});
        auto [m2, e2] = run_comparison(glitch);
        CHECK(any_nonzero_mark(m2));        // immediate switch on detection
        CHECK_FALSE(any_nonzero_mark(e2));  // timeslot absorbs the glitch
        CHECK(all_delivered(e2));
    }

    SUBCASE("post-recovery: EMRC returns to the short route, MRC does not") {
        // Post-recovery packets: EMRC back on 3 hops, MRC stuck on 4 hops.
        CHECK(emrc_r.summary.post_recovery.mean_latency <
              mrc.summary.post_recovery.mean_latency);
        CHECK(emrc_r.summary.mean_latency <= mrc.summary.mean_latency);
    }

    SUBCASE("no failures: both modes produce identical results") {
        Scenario calm = base_scenario(test::load_fixture("diamond8.topo"));
        auto [m3, e3] = run_comparison(calm);
        CHECK(m3.records == e3.records);
        CHECK(m3.log == e3.log);
        CHECK(m3.summary == e3.summary);
        std::string delta = delta_csv(m3, e3);
        // Every delta row ends in ",0".
        std::istringstream ss(delta);
        std::string line;
        std::getline(ss, line);  // header
        while (std::getline(ss, line)) {
            CHECK(line.substr(line.rfind(',')) == ",0");
        }
    }
}

TEST_CASE("same seed gives byte-identical outputs") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    sc.failures.push_back({FailedComponent::node(5), 100'000, 400'000});
    SimResult a = run(sc);
    SimResult b = run(sc);
    CHECK(a == b);
    CHECK(packets_csv(a) == packets_csv(b));
    CHECK(summary_to_json(a).dump() == summary_to_json(b).dump());
}

TEST_CASE("conservation: every injected packet is accounted for") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    sc.flows.push_back({2, 0, 7'000, 40, 0});
    sc.failures.push_back({FailedComponent::node(5), 100'000, std::nullopt});
    sc.failures.push_back({FailedComponent::link(4, 7), 150'000, 350'000});
    SimResult r = run(sc);
    std::uint64_t resolved = 0;
    for (const PacketRecord& p : r.records) {
        CHECK((p.delivered() || p.drop_reason.has_value()));
        CHECK_FALSE((p.delivered() && p.drop_reason.has_value()));
        ++resolved;
    }
    CHECK(resolved == r.summary.injected);
    CHECK(r.summary.injected == r.summary.delivered + r.summary.dropped);
}

TEST_CASE("double failure keeps the loop-freedom guarantee") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    sc.flows[0].count = 100;
    sc.failures.push_back({FailedComponent::node(5), 100'000, 300'000});
    sc.failures.push_back({FailedComponent::link(4, 7), 150'000, 280'000});
    SimResult r = run(sc);
    for (const PacketRecord& p : r.records) {
        std::set<std::pair<NodeId, int>> seen(p.hops.begin(), p.hops.end());
        CHECK(seen.size() == p.hops.size());
        if (p.drop_reason) {
            CHECK((*p.drop_reason == DropReason::SecondFailureSameConfig ||
                   *p.drop_reason == DropReason::DestinationDown ||
                   *p.drop_reason == DropReason::HoldOverflow ||
                   *p.drop_reason == DropReason::LoopDetected ||
                   *p.drop_reason == DropReason::NoBackupConfig ||
                   *p.drop_reason == DropReason::InFlightLoss));
        }
    }
}

TEST_CASE("detection fan-out") {
    SUBCASE("node failure alerts every neighbor") {
        Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
        sc.failures.push_back({FailedComponent::node(5), 100'000, std::nullopt});
        sc.flows[0].count = 5;
        SimResult r = run(sc);
        std::set<NodeId> detectors;
        for (const auto& e : r.log) {
            if (e.event.rfind("detected", 0) == 0 && e.at == 110'000) detectors.insert(e.node);
        }
        CHECK(detectors == std::set<NodeId>{0, 4, 6});  // node 5's neighbors
    }

    SUBCASE("link failure alerts exactly its endpoints") {
        Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
        sc.failures.push_back({FailedComponent::link(4, 5), 100'000, std::nullopt});
        sc.flows[0].count = 5;
        SimResult r = run(sc);
        std::set<NodeId> detectors;
        for (const auto& e : r.log) {
            if (e.event.rfind("detected", 0) == 0 && e.at == 110'000) detectors.insert(e.node);
        }
        CHECK(detectors == std::set<NodeId>{4, 5});
    }
}

TEST_CASE("permanent link failure triggers a full re-convergence on K4") {
    Scenario sc;
    sc.topology = test::make_complete(4);
    sc.flows.push_back({0, 1, 10'000, 130, 0});
    sc.failures.push_back({FailedComponent::link(0, 1), 50'000, std::nullopt});
    SimResult r = run(sc);

    CHECK(r.reconverged);
    CHECK_FALSE(r.degraded);  // K4 minus one link is still biconnected
    CHECK(all_delivered(r));

    SimTime reconv_at = -1;
    for (const auto& e : r.log) {
        if (e.event.rfind("reconvergence_done", 0) == 0) reconv_at = e.at;
    }
    REQUIRE(reconv_at > 0);
    for (const PacketRecord& p : r.records) {
        if (p.injected_at > reconv_at) {
            CHECK(p.marks == std::vector<int>{0});  // fresh tables, mark zero
            CHECK(p.path == std::vector<NodeId>{0, 2, 1});
        }
    }
}

TEST_CASE("second permanent failure re-converges on the doubly reduced topology") {
    Scenario sc;
    sc.topology = test::make_complete(4);
    sc.flows.push_back({0, 1, 10'000, 220, 0});
    sc.flows.push_back({2, 3, 10'000, 220, 0});
    sc.failures.push_back({FailedComponent::link(0, 1), 50'000, std::nullopt});
    sc.failures.push_back({FailedComponent::link(2, 3), 900'000, std::nullopt});
    SimResult r = run(sc);

    CHECK(all_delivered(r));
    CHECK(r.reconverged);
    CHECK_FALSE(r.degraded);  // K4 minus both links is a 4-cycle
    int reconv_count = 0;
    SimTime second_reconv = -1;
    for (const auto& e : r.log) {
        if (e.event.rfind("reconvergence_done", 0) == 0) {
            ++reconv_count;
            second_reconv = e.at;
        }
    }
    CHECK(reconv_count == 2);
    for (const PacketRecord& p : r.records) {
        if (p.injected_at <= second_reconv) continue;
        CHECK(p.marks == std::vector<int>{0});
        if (p.src == 0) CHECK(p.path == std::vector<NodeId>{0, 2, 1});
        // After both removals the 2 -> 3 traffic must avoid both dead links.
        if (p.src == 2) CHECK(p.path == std::vector<NodeId>{2, 0, 3});
    }
    CHECK(run(sc) == r);  // determinism across the double rebuild
}

TEST_CASE("ring minus a node cannot be re-protected: degraded re-convergence") {
    Scenario sc;
    sc.topology = test::make_ring(4);
    sc.flows.push_back({1, 3, 10'000, 130, 0});
    sc.failures.push_back({FailedComponent::node(0), 50'000, std::nullopt});
    SimResult r = run(sc);

    CHECK(r.reconverged);
    CHECK(r.degraded);
    CHECK(all_delivered(r));
    SimTime reconv_at = -1;
    for (const auto& e : r.log) {
        if (e.event == "reconvergence_done degraded") reconv_at = e.at;
    }
    REQUIRE(reconv_at > 0);
    for (const PacketRecord& p : r.records) {
        if (p.injected_at > reconv_at) {
            CHECK(p.path == std::vector<NodeId>{1, 2, 3});
        }
    }
}

TEST_CASE("scenario validation rejects bad input") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    SUBCASE("unknown flow node") {
        sc.flows.push_back({55, 0, 1'000, 3, 0});
        CHECK_THROWS_AS(validate_scenario(sc), ScenarioError);
    }
    SUBCASE("unknown failed component") {
        sc.failures.push_back({FailedComponent::link(0, 4), 1'000, std::nullopt});
        CHECK_THROWS_AS(validate_scenario(sc), UnknownComponent);
    }
    SUBCASE("overlapping failure intervals") {
        sc.failures.push_back({FailedComponent::node(5), 1'000, 5'000});
        sc.failures.push_back({FailedComponent::node(5), 3'000, 8'000});
        CHECK_THROWS_AS(validate_scenario(sc), ScenarioError);
    }
    SUBCASE("timeslot must stay below the re-convergence deadline") {
        sc.timers.t_slot = sc.timers.t_reconv;
        CHECK_THROWS_AS(validate_scenario(sc), ScenarioError);
    }
}

TEST_CASE("scenario JSON file loads and runs") {
    std::string path = test::fixture_path("scenarios/diamond8_node5.json");
    nlohmann::json j = nlohmann::json::parse(test::read_file(path));
    Scenario sc = scenario_from_json(j, [&](const std::string& rel) {
        return test::load_fixture(rel.substr(rel.rfind('/') + 1));
    });
    CHECK(sc.name == "diamond8-node5-outage");
    CHECK(sc.mode == ProtocolMode::Emrc);
    CHECK(sc.topology.node_count() == 8);
    REQUIRE(sc.failures.size() == 1);
    CHECK(sc.failures[0].component == FailedComponent::node(5));
    SimResult r = run(sc);
    CHECK(all_delivered(r));
}

TEST_CASE("twenty-node smoke run") {
    std::mt19937_64 rng(2020);
    Scenario sc;
    sc.topology = test::random_biconnected(rng, 20, 20, 5);
    sc.flows = {{0, 19, 5'000, 80, 0}, {19, 0, 5'000, 80, 0}, {3, 12, 7'000, 60, 0}};
    sc.failures = {{FailedComponent::node(7), 100'000, 300'000}};
    SimResult r = run(sc);
    for (const PacketRecord& p : r.records) {
        if (p.dst != 7 && p.src != 7) CHECK(p.delivered());
        std::set<std::pair<NodeId, int>> unique(p.hops.begin(), p.hops.end());
        CHECK(unique.size() == p.hops.size());
    }
    CHECK(run(sc) == r);
}

TEST_CASE("summary is recomputable from the records") {
    Scenario sc = base_scenario(test::load_fixture("diamond8.topo"));
    sc.failures.push_back({FailedComponent::node(5), 100'000, 200'000});
    SimResult r = run(sc);
    CHECK(summarize(sc, r.records) == r.summary);
    CHECK(r.summary.pre_failure.injected + r.summary.during_failure.injected +
              r.summary.post_recovery.injected ==
          r.summary.injected);
}
