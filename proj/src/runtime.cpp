#include "qmpi/runtime.hpp"

#include <chrono>
#include <mutex>
#include <set>
#include <thread>

namespace qmpi {

RankContext::RankContext(int rank, int size, Fabric& fabric,
                         const std::map<std::string, std::string>& args)
    : rank_(rank), size_(size), fabric_(fabric), args_(args), comm_(rank, size, fabric) {}

std::string RankContext::arg(const std::string& key) const {
    auto it = args_.find(key);
    if (it == args_.end()) {
        throw Error(ErrorCode::BadLaunchSpec, "missing launch argument --" + key);
    }
    return it->second;
}

std::string RunReport::bitstring() const {
    std::string out;
    for (const auto& rank : ranks) {
        for (int bit : rank.bits) out += static_cast<char>('0' + bit);
    }
    return out;
}

ProgramRegistry& ProgramRegistry::global() {
    static ProgramRegistry registry;
    return registry;
}

void ProgramRegistry::register_program(const std::string& name, ProgramFn fn) {
    if (programs_.count(name)) {
        throw Error(ErrorCode::DuplicateName, "program '" + name + "' is already registered");
    }
    programs_[name] = std::move(fn);
}

bool ProgramRegistry::contains(const std::string& name) const { return programs_.count(name); }

const ProgramFn& ProgramRegistry::get(const std::string& name) const {
    auto it = programs_.find(name);
    if (it == programs_.end()) {
        throw Error(ErrorCode::UnknownProgram, "no program named '" + name + "'");
    }
    return it->second;
}

std::vector<std::string> ProgramRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, fn] : programs_) out.push_back(name);
    return out;
}

void register_program(const std::string& name, ProgramFn fn) {
    ProgramRegistry::global().register_program(name, std::move(fn));
}

World::World(const TopologyConfig& config, SchedulerMode mode) : fabric_(config, mode) {}

RunReport World::run(const ProgramFn& fn, const std::map<std::string, std::string>& args) {
    if (used_) {
        throw Error(ErrorCode::BadLaunchSpec, "a World instance runs exactly once");
    }
    used_ = true;

    const int size = fabric_.size();
    RunReport report;
    report.ranks.resize(size);

    struct Failure {
        int rank;
        ErrorCode code;
        std::string message;
    };
    std::vector<Failure> failures;
    std::mutex failures_mu;

    std::vector<std::unique_ptr<RankContext>> contexts(size);
    RankScheduler& scheduler = fabric_.scheduler();

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::thread> threads;
    threads.reserve(size);
    for (int rank = 0; rank < size; ++rank) {
        threads.emplace_back([&, rank] {
            bool attached = false;
            try {
                scheduler.attach(rank);
                attached = true;
                contexts[rank] = std::make_unique<RankContext>(rank, size, fabric_, args);
                fn(*contexts[rank]);
            } catch (const Error& e) {
                {
                    std::lock_guard lock(failures_mu);
                    failures.push_back({rank, e.code(), e.what()});
                }
                if (e.code() != ErrorCode::Interrupted) scheduler.request_shutdown();
            } catch (const std::exception& e) {
                {
                    std::lock_guard lock(failures_mu);
                    failures.push_back({rank, ErrorCode::RankPanic, e.what()});
                }
                scheduler.request_shutdown();
            }
            if (attached) scheduler.detach(rank);
        });
    }
    for (auto& t : threads) t.join();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (int rank = 0; rank < size; ++rank) {
        if (contexts[rank]) {
            report.ranks[rank].output = contexts[rank]->output();
            report.ranks[rank].bits = contexts[rank]->bits();
        }
    }
    for (const auto& f : failures) {
        report.ranks[f.rank].ok = false;
        report.ranks[f.rank].error = f.message;
        report.ranks[f.rank].error_code = f.code;
    }

    if (!failures.empty()) {
        report.ok = false;
        // The primary failure is the first rank that failed for a real
        // reason; ranks torn down by the shutdown rank behind it.
        const Failure* primary = nullptr;
        for (const auto& f : failures) {
            if (f.code != ErrorCode::Interrupted && f.code != ErrorCode::DeadlockTimeout) {
                primary = &f;
                break;
            }
        }
        if (primary) {
            report.failed_rank = primary->rank;
            report.failure = ErrorCode::RankPanic;
            report.error = "rank " + std::to_string(primary->rank) + ": " + primary->message;
        } else {
            const Failure* deadlocked = nullptr;
            for (const auto& f : failures) {
                if (f.code == ErrorCode::DeadlockTimeout) {
                    deadlocked = &f;
                    break;
                }
            }
            const Failure& f = deadlocked ? *deadlocked : failures.front();
            report.failed_rank = f.rank;
            report.failure = ErrorCode::GlobalDeadlock;
            report.error = "rank " + std::to_string(f.rank) + ": " + f.message;
        }
    }
    return report;
}

namespace {

TopologyConfig resolve_config(const LaunchSpec& spec) {
    if (spec.num_ranks < 1) {
        throw Error(ErrorCode::BadLaunchSpec,
                    "num_ranks must be >= 1, got " + std::to_string(spec.num_ranks));
    }
    TopologyConfig config;
    std::set<std::string> seen_keys;
    if (spec.config_path) {
        config = parse_topology_file(*spec.config_path, &seen_keys);
    }
    if (seen_keys.count("size") && config.size != spec.num_ranks) {
        throw Error(ErrorCode::SizeMismatch,
                    "config file says size=" + std::to_string(config.size) +
                        " but the launch asks for " + std::to_string(spec.num_ranks) + " ranks");
    }
    config.size = spec.num_ranks;
    if (spec.seed) config.seed = *spec.seed;
    return config;
}

}  // namespace

RunReport launch_program(const LaunchSpec& spec, const ProgramFn& fn) {
    const TopologyConfig config = resolve_config(spec);
    World world(config, spec.scheduler);
    RunReport report = world.run(fn, spec.args);
    if (spec.trace_path) {
        world.trace().write_file(*spec.trace_path);
    }
    return report;
}

RunReport launch(const LaunchSpec& spec) {
    const ProgramFn& fn = ProgramRegistry::global().get(spec.program);
    return launch_program(spec, fn);
}

ShotStats run_shots(const LaunchSpec& spec, int shots,
                    const std::function<void(int, const RunReport&)>& per_shot) {
    if (shots < 1) {
        throw Error(ErrorCode::BadLaunchSpec, "shots must be >= 1");
    }
    const ProgramFn& fn = ProgramRegistry::global().get(spec.program);
    const std::uint64_t base_seed = spec.seed.value_or(0);

    ShotStats stats;
    for (int shot = 0; shot < shots; ++shot) {
        LaunchSpec one = spec;
        one.seed = base_seed + static_cast<std::uint64_t>(shot);
        RunReport report = launch_program(one, fn);
        if (per_shot) per_shot(shot, report);
        if (!report.ok) {
            throw Error(report.failure.value_or(ErrorCode::RankPanic),
                        "shot " + std::to_string(shot) + ": " + report.error);
        }
        ++stats.shots;
        ++stats.counts[report.bitstring()];
    }
    return stats;
}

}  // namespace qmpi
