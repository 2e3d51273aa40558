// emrc: validate topologies, generate backup configurations, and run
// recovery scenarios (emrc / mrc / side-by-side comparison).

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emrc/configgen.hpp"
#include "emrc/routing.hpp"
#include "emrc/simcore.hpp"
#include "emrc/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;  // infeasible / invalid input topology
constexpr int kExitInput = 2;   // unreadable or malformed input

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw emrc::Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw emrc::Error("cannot write " + path.string());
    out << content;
}

int cmd_validate(const std::string& topo_path, bool directed) {
    emrc::Graph g;
    try {
        g = emrc::parse_topology(read_file(topo_path), !directed);
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cout << "nodes: " << g.node_count() << "\n";
    std::cout << "links: " << g.links().size() << " directed (" << g.links().size() / 2
              << " undirected pairs)\n";
    std::cout << "w_max: " << g.w_max() << "\n";
    auto report = emrc::check_biconnectivity(g);
    if (report.biconnected) {
        std::cout << "biconnected: yes\n";
        return kExitOk;
    }
    if (!report.connected) {
        std::cout << "biconnected: no (not connected)\n";
    } else if (report.articulation) {
        std::cout << "biconnected: no (articulation node " << *report.articulation << ")\n";
    } else {
        std::cout << "biconnected: no (fewer than 3 nodes)\n";
    }
    return kExitDomain;
}

int cmd_genconfig(const std::string& topo_path, const std::string& n_arg, std::uint64_t seed,
                  bool directed, const std::string& out_path, const std::string& tables_path) {
    emrc::Graph g;
    try {
        g = emrc::parse_topology(read_file(topo_path), !directed);
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInput;
    }
    emrc::ConfigurationSet cs;
    int chosen_n = 0;
    try {
        if (n_arg == "auto") {
            cs = emrc::generate_configs_auto(g, seed, &chosen_n);
            std::cout << "minimal n: " << chosen_n << "\n";
        } else {
            int n = 0;
            try {
                n = std::stoi(n_arg);
            } catch (const std::exception&) {
                std::cerr << "bad --n value '" << n_arg << "'\n";
                return kExitInput;
            }
            cs = emrc::generate_configs(g, n, seed);
        }
    } catch (const emrc::InsufficientConfigurations& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        std::cerr << "first failing component: " << e.component() << "\n";
        return kExitDomain;
    } catch (const emrc::NotBiconnected& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitDomain;
    }

    auto coverage = emrc::coverage_report(cs, g);
    std::cout << "backup configurations: " << cs.backup_count() << "\n";
    std::cout << "w_r: " << cs.w_r << "\n";
    std::cout << "coverage:\n";
    for (emrc::NodeId u = 0; u < g.node_count(); ++u) {
        std::cout << "  node " << u << " isolated in C_";
        for (int i : coverage.node_isolated_in[u]) std::cout << i;
        std::cout << "\n";
    }
    for (const auto& [l, owners] : coverage.link_isolated_in) {
        std::cout << "  " << emrc::to_string(l) << " isolated in C_";
        for (int i : owners) std::cout << i;
        std::cout << "\n";
    }
    std::cout << (coverage.exact() ? "every node and link isolated exactly once\n"
                                   : "coverage is NOT exact\n");

    if (!out_path.empty()) {
        write_file(out_path, emrc::config_set_to_json(cs).dump(2) + "\n");
        std::cout << "wrote " << out_path << "\n";
    }
    if (!tables_path.empty()) {
        write_file(tables_path, emrc::tables_to_csv(emrc::build_tables(g, cs)));
        std::cout << "wrote " << tables_path << "\n";
    }
    return coverage.exact() ? kExitOk : kExitDomain;
}

struct RunOptions {
    std::string scenario_path;
    std::string mode = "scenario";  // emrc | mrc | both | scenario(default from file)
    std::string out_dir = "out";
    std::vector<std::uint64_t> seeds;
    std::string timers;
    int jobs = 1;
};

json make_manifest(const RunOptions& opt, const emrc::Scenario& sc,
                   const std::string& topo_path, const std::string& mode) {
    json m;
    m["tool"] = "emrc";
    m["version"] = kVersion;
    m["scenario"] = opt.scenario_path;
    m["topology"] = topo_path;
    m["mode"] = mode;
    m["n"] = sc.n.has_value() ? json(*sc.n) : json("auto");
    m["seed"] = sc.seed;
    m["timers"] = {{"t_slot", sc.timers.t_slot},
                   {"t_probe", sc.timers.t_probe},
                   {"t_reconv", sc.timers.t_reconv}};
    m["link_delay"] = sc.link_delay;
    m["detection_delay"] = sc.detection_delay;
    return m;
}

void run_one_seed(const RunOptions& opt, emrc::Scenario sc, const std::string& topo_path,
                  std::uint64_t seed, const fs::path& dir) {
    sc.seed = seed;
    fs::create_directories(dir);

    std::string mode = opt.mode == "scenario" ? emrc::to_string(sc.mode) : opt.mode;
    json manifest = make_manifest(opt, sc, topo_path, mode);

    if (mode == "both") {
        auto [mrc, emrc_result] = emrc::run_comparison(sc);
        write_file(dir / "packets_mrc.csv", emrc::packets_csv(mrc));
        write_file(dir / "packets_emrc.csv", emrc::packets_csv(emrc_result));
        write_file(dir / "summary_mrc.json", emrc::summary_to_json(mrc).dump(2) + "\n");
        write_file(dir / "summary_emrc.json", emrc::summary_to_json(emrc_result).dump(2) + "\n");
        write_file(dir / "delta.csv", emrc::delta_csv(mrc, emrc_result));
    } else {
        sc.mode = mode == "mrc" ? emrc::ProtocolMode::Mrc : emrc::ProtocolMode::Emrc;
        emrc::SimResult result = emrc::run(sc);
        std::string stem = std::string("packets_") + mode;
        write_file(dir / (stem + ".csv"), emrc::packets_csv(result));
        write_file(dir / (std::string("summary_") + mode + ".json"),
                   emrc::summary_to_json(result).dump(2) + "\n");
    }
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_run(const RunOptions& opt) {
    json doc;
    emrc::Scenario sc;
    std::string topo_path;
    try {
        doc = json::parse(read_file(opt.scenario_path));
        fs::path base = fs::path(opt.scenario_path).parent_path();
        sc = emrc::scenario_from_json(doc, [&](const std::string& rel) {
            fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
            p = p.lexically_normal();
            topo_path = p.string();
            return emrc::parse_topology(read_file(p));
        });
    } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitInput;
    }

    if (!opt.timers.empty()) {
        std::istringstream ss(opt.timers);
        std::string tok;
        std::vector<emrc::SimTime> values;
        while (std::getline(ss, tok, ',')) values.push_back(std::stoll(tok));
        if (values.size() != 3) {
            std::cerr << "--timers expects t_slot,t_probe,t_reconv\n";
            return kExitInput;
        }
        sc.timers = {values[0], values[1], values[2]};
    }

    try {
        emrc::validate_scenario(sc);
    } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitInput;
    }

    std::vector<std::uint64_t> seeds = opt.seeds.empty()
                                           ? std::vector<std::uint64_t>{sc.seed}
                                           : opt.seeds;
    try {
        if (seeds.size() == 1) {
            run_one_seed(opt, sc, topo_path, seeds[0], opt.out_dir);
        } else {
            // Seed sweep: independent runs, optionally in parallel.
            std::size_t jobs = std::max(1, opt.jobs);
            std::vector<std::thread> pool;
            std::exception_ptr first_error;
            std::mutex error_mutex;
            std::atomic<std::size_t> cursor{0};
            for (std::size_t t = 0; t < std::min(jobs, seeds.size()); ++t) {
                pool.emplace_back([&]() {
                    for (;;) {
                        std::size_t i = cursor.fetch_add(1);
                        if (i >= seeds.size()) return;
                        try {
                            fs::path dir =
                                fs::path(opt.out_dir) / ("seed_" + std::to_string(seeds[i]));
                            run_one_seed(opt, sc, topo_path, seeds[i], dir);
                        } catch (...) {
                            std::lock_guard<std::mutex> lk(error_mutex);
                            if (!first_error) first_error = std::current_exception();
                        }
                    }
                });
            }
            for (auto& th : pool) th.join();
            if (first_error) std::rethrow_exception(first_error);
        }
    } catch (const emrc::NotBiconnected& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitDomain;
    } catch (const emrc::InsufficientConfigurations& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    std::cout << "results written to " << opt.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proactive multi-configuration IP fast-reroute toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // validate
    std::string topo_path;
    bool directed = false;
    auto* validate = app.add_subcommand("validate", "Parse a topology and check bi-connectivity");
    validate->add_option("topology", topo_path, "topology file")->required();
    validate->add_flag("--directed", directed, "treat link lines as directed (no mirroring)");

    // genconfig
    std::string gc_topo;
    std::string gc_n = "auto";
    std::string gc_out;
    std::string gc_tables;
    std::uint64_t gc_seed = 0;
    bool gc_directed = false;
    auto* genconfig = app.add_subcommand("genconfig", "Generate backup configurations");
    genconfig->add_option("topology", gc_topo, "topology file")->required();
    genconfig->add_option("--n", gc_n, "backup configuration count or 'auto'");
    genconfig->add_option("--seed", gc_seed, "generation seed");
    genconfig->add_option("--out", gc_out, "write the configuration set JSON here");
    genconfig->add_option("--tables", gc_tables, "write per-configuration forwarding tables CSV");
    genconfig->add_flag("--directed", gc_directed, "treat link lines as directed");

    // run
    RunOptions run_opt;
    std::string seeds_arg;
    auto* run_cmd = app.add_subcommand("run", "Run a failure scenario");
    run_cmd->add_option("scenario", run_opt.scenario_path, "scenario JSON file")->required();
    run_cmd->add_option("--mode", run_opt.mode, "emrc | mrc | both (default: scenario file)")
        ->check(CLI::IsMember({"emrc", "mrc", "both", "scenario"}));
    run_cmd->add_option("--out", run_opt.out_dir, "output directory");
    run_cmd->add_option("--seeds", seeds_arg, "comma-separated seed sweep");
    run_cmd->add_option("--jobs", run_opt.jobs, "parallel workers for seed sweeps");
    run_cmd->add_option("--timers", run_opt.timers, "t_slot,t_probe,t_reconv in ticks");
    std::uint64_t run_seed = 0;
    auto* seed_opt = run_cmd->add_option("--seed", run_seed, "override the scenario seed");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(topo_path, directed);
    if (genconfig->parsed()) {
        return cmd_genconfig(gc_topo, gc_n, gc_seed, gc_directed, gc_out, gc_tables);
    }
    if (run_cmd->parsed()) {
        if (!seeds_arg.empty()) {
            std::istringstream ss(seeds_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) run_opt.seeds.push_back(std::stoull(tok));
        } else if (seed_opt->count() > 0) {
            run_opt.seeds.push_back(run_seed);
        }
        return cmd_run(run_opt);
    }
    return kExitInput;
}
