#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmpi/communicator.hpp"

namespace qmpi {

class RankContext;
using ProgramFn = std::function<void(RankContext&)>;

// Everything one launch needs. Config-file values fill whatever the spec
// leaves unset; an explicit seed here wins over the config's seed, and a
// config `size` that disagrees with num_ranks is a SizeMismatch.
struct LaunchSpec {
    std::string program;
    int num_ranks = 1;
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    SchedulerMode scheduler = SchedulerMode::RoundRobinDeterministic;
    std::optional<std::string> trace_path;
    std::map<std::string, std::string> args;  // free-form, e.g. asm file paths
};

// What a rank program gets to touch. One per rank, created by the runtime
// before the entry procedure runs; the communicator inside has already done
// its init handshake.
class RankContext {
  public:
    RankContext(int rank, int size, Fabric& fabric,
                const std::map<std::string, std::string>& args);

    int rank() const { return rank_; }
    int size() const { return size_; }
    Communicator& comm() { return comm_; }
    Fabric& fabric() { return fabric_; }

    Qubit alloc_qubit() { return Qubit(&fabric_, fabric_.alloc_qubit(rank_), rank_); }

    // Rank-tagged output line, surfaced through the run report.
    void print(std::string line) { output_.push_back(std::move(line)); }

    // Surface a measured bit; shot aggregation concatenates these across
    // ranks in rank order.
    void emit_bit(int bit) { bits_.push_back(bit & 1); }

    bool has_arg(const std::string& key) const { return args_.count(key) != 0; }
    std::string arg(const std::string& key) const;

    // Test plumbing; forwards to the engine under the run lock.
    void prepare(Qubit& q, std::complex<double> a0, std::complex<double> a1) {
        fabric_.set_amplitudes(rank_, q.handle(), a0, a1);
    }
    std::vector<std::complex<double>> snapshot(const std::vector<QubitHandle>& qubits) {
        return fabric_.snapshot(rank_, qubits);
    }

    const std::vector<std::string>& output() const { return output_; }
    const std::vector<int>& bits() const { return bits_; }

  private:
    int rank_;
    int size_;
    Fabric& fabric_;
    const std::map<std::string, std::string>& args_;
    Communicator comm_;
    std::vector<std::string> output_;
    std::vector<int> bits_;
};

struct RankReport {
    std::vector<std::string> output;
    std::vector<int> bits;
    bool ok = true;
    std::string error;
    std::optional<ErrorCode> error_code;
};

struct RunReport {
    std::vector<RankReport> ranks;
    bool ok = true;
    int failed_rank = -1;
    std::optional<ErrorCode> failure;  // RankPanic or GlobalDeadlock
    std::string error;
    double wall_seconds = 0.0;

    // Concatenation of every rank's emitted bits, rank order.
    std::string bitstring() const;
};

// Name -> entry procedure. Programs are compiled in and registered up front;
// there is no script loading.
class ProgramRegistry {
  public:
    static ProgramRegistry& global();

    void register_program(const std::string& name, ProgramFn fn);
    bool contains(const std::string& name) const;
    const ProgramFn& get(const std::string& name) const;
    std::vector<std::string> names() const;

  private:
    std::map<std::string, ProgramFn> programs_;
};

void register_program(const std::string& name, ProgramFn fn);

// One fabric plus its rank threads. launch() wraps this; tests use it
// directly when they need to inspect engine or trace state afterwards.
class World {
  public:
    World(const TopologyConfig& config, SchedulerMode mode);

    // Spawns one thread per rank, runs `fn` everywhere, joins, and reports.
    // A World runs exactly once.
    RunReport run(const ProgramFn& fn, const std::map<std::string, std::string>& args = {});

    Fabric& fabric() { return fabric_; }
    StateEngine& engine() { return fabric_.engine_unlocked(); }
    TraceLog& trace() { return fabric_.trace_unlocked(); }

  private:
    Fabric fabric_;
    bool used_ = false;
};

// Resolves the spec (config file, program name), runs one world, writes the
// trace file if requested. Throws for pre-flight problems (UnknownProgram,
// BadLaunchSpec, config errors); rank failures come back in the report.
RunReport launch(const LaunchSpec& spec);

// Same, but with an explicit entry procedure instead of a registry name.
RunReport launch_program(const LaunchSpec& spec, const ProgramFn& fn);

struct ShotStats {
    int shots = 0;
    std::map<std::string, int> counts;  // bitstring -> occurrences
};

// Repeats launch() with derived seeds (base + shot index), aggregating the
// per-shot bitstrings. Stops at the first failed shot. per_shot, when given,
// sees every report as it lands.
ShotStats run_shots(const LaunchSpec& spec, int shots,
                    const std::function<void(int, const RunReport&)>& per_shot = {});

}  // namespace qmpi
