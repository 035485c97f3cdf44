#include "qmpi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <sstream>

#include "qmpi/programs.hpp"
#include "qmpi/runtime.hpp"

namespace qmpi {

namespace {

void print_rank_output(const RunReport& report, std::ostream& out) {
    for (std::size_t r = 0; r < report.ranks.size(); ++r) {
        for (const std::string& line : report.ranks[r].output) {
            out << "rank=" << r << ": " << line << "\n";
        }
    }
}

void print_summary(const ShotStats& stats, std::ostream& out) {
    const bool any_bits = std::any_of(stats.counts.begin(), stats.counts.end(),
                                      [](const auto& kv) { return !kv.first.empty(); });
    if (!any_bits) return;
    out << "shots=" << stats.shots << "\n";
    for (const auto& [bits, count] : stats.counts) {
        out << "outcome " << bits << " count=" << count << " fraction="
            << static_cast<double>(count) / static_cast<double>(stats.shots) << "\n";
    }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SPMD launcher for distributed quantum programs"};

    int num_ranks = 1;
    std::string program;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string scheduler = "round-robin-deterministic";
    std::string trace_path;
    int shots = 1;
    std::string asm_path;
    std::string peer_asm_path;

    app.add_option("-n,--ranks", num_ranks, "number of ranks to spawn")
        ->check(CLI::PositiveNumber);
    app.add_option("--program", program, "registered program name")->required();
    app.add_option("--config", config_path, "topology config file (key=value lines)");
    auto* seed_opt = app.add_option("--seed", seed, "base random seed");
    app.add_option("--scheduler", scheduler, "rank scheduling mode")
        ->check(CLI::IsMember({"round-robin-deterministic", "concurrent"}));
    app.add_option("--trace", trace_path, "write the operation trace to this file");
    app.add_option("--shots", shots, "repeat the launch, aggregating measured bits")
        ->check(CLI::PositiveNumber);
    app.add_option("--asm", asm_path, "assembly file for rank 0 (program nqasm-run)");
    app.add_option("--peer-asm", peer_asm_path, "assembly file for rank 1 (program nqasm-run)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    programs::ensure_builtin_programs();

    LaunchSpec spec;
    spec.program = program;
    spec.num_ranks = num_ranks;
    if (!config_path.empty()) spec.config_path = config_path;
    if (seed_opt->count() > 0) spec.seed = seed;
    spec.scheduler = scheduler == "concurrent" ? SchedulerMode::Concurrent
                                               : SchedulerMode::RoundRobinDeterministic;
    if (!trace_path.empty()) spec.trace_path = trace_path;
    if (!asm_path.empty()) spec.args["asm"] = asm_path;
    if (!peer_asm_path.empty()) spec.args["peer-asm"] = peer_asm_path;

    if (!ProgramRegistry::global().contains(program)) {
        err << "error: no program named '" << program << "'; available:";
        for (const std::string& name : ProgramRegistry::global().names()) err << " " << name;
        err << "\n";
        return 1;
    }

    try {
        const ShotStats stats = run_shots(spec, shots, [&](int, const RunReport& report) {
            print_rank_output(report, out);
        });
        print_summary(stats, out);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qmpi
