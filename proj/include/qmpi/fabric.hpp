#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qmpi/engine.hpp"
#include "qmpi/scheduler.hpp"
#include "qmpi/trace.hpp"

namespace qmpi {

// Which rank pairs may hold entanglement sockets. Classical channels always
// form a full mesh; connectivity only constrains the quantum plane.
struct Connectivity {
    bool mesh = true;
    std::set<std::pair<int, int>> pairs;  // normalized (low, high), used when !mesh

    bool connected(int a, int b) const;
};

struct TopologyConfig {
    int size = 1;
    Connectivity connectivity;
    int qubit_cap = kDefaultQubitCap;
    std::uint64_t seed = 0;
    double deadlock_timeout = 10.0;  // seconds; concurrent scheduler only
};

// Parses the plain-text key=value config format:
//   size=3
//   connectivity=mesh          (or: connectivity=pairs:(0,1),(1,2))
//   qubit_cap=24
//   seed=7
// Blank lines and lines starting with '#' are skipped; unknown keys are
// errors.
// When `seen_keys` is non-null it receives every key the text mentioned, so
// callers can tell an explicit `size=1` apart from the default.
TopologyConfig parse_topology_text(const std::string& text, std::set<std::string>* seen_keys = nullptr);
TopologyConfig parse_topology_file(const std::string& path, std::set<std::string>* seen_keys = nullptr);

struct ClassicalMessage {
    std::string tag;
    std::vector<int> payload;
};

// One entanglement endpoint pair. Each generated pair leaves one half with
// the initiator immediately and queues the other half here until the peer
// receives it; halves match creations 1:1 in FIFO order per direction.
struct EprSocket {
    int node_a;
    int node_b;

    struct PendingHalf {
        std::uint64_t pair_id;
        QubitHandle handle;
    };
    // Keyed by initiating endpoint.
    std::map<int, std::deque<PendingHalf>> pending;

    std::uint64_t created = 0;
    std::uint64_t received = 0;
};

// The simulated network substrate for one run: the shared state engine, the
// ordered lossless classical channels, the entanglement sockets, and the
// shared-session queues behind the collectives. Every operation commits under
// the scheduler's lock and emits exactly one trace record.
class Fabric {
  public:
    Fabric(const TopologyConfig& config, SchedulerMode mode);

    int size() const { return config_.size; }
    const TopologyConfig& config() const { return config_; }
    bool connected(int a, int b) const;

    // --- classical plane ------------------------------------------------
    // Non-blocking enqueue onto the ordered (from -> to) channel.
    void csend(int from, int to, ClassicalMessage message);

    // Blocks until the (from -> at) channel has a message, then requires the
    // head's tag to match exactly; a different tag at the head is an error,
    // not a skip.
    ClassicalMessage crecv(int at, int from, const std::string& tag);

    // --- entanglement plane ----------------------------------------------
    // Generates one pair on the (initiator, peer) socket; returns the
    // initiator's half and queues the peer's half.
    QubitHandle epr_create(int initiator, int peer);

    // Blocks until a pair initiated by `initiator` is pending, then delivers
    // this endpoint's half.
    QubitHandle epr_recv(int receiver, int initiator);

    // One GHZ state across all owners; every owner (initiator included)
    // collects its share with ghz_recv.
    void ghz_create(std::span<const int> owners, int initiator);
    QubitHandle ghz_recv(int owner);

    // --- local quantum operations (locality enforced) ---------------------
    QubitHandle alloc_qubit(int caller);
    void apply_gate(int caller, GateKind gate, std::initializer_list<QubitHandle> qubits);
    int measure(int caller, QubitHandle q);
    void free_qubit(int caller, QubitHandle q);
    void set_amplitudes(int caller, QubitHandle q, std::complex<double> a0,
                        std::complex<double> a1);

    // Observability plumbing; no locality check and no trace record.
    std::vector<std::complex<double>> snapshot(int caller,
                                               std::span<const QubitHandle> qubits);

    // Locked read-only predicates used by the primitives layer.
    bool qubit_live(QubitHandle q);
    std::uint32_t qubit_measure_count(QubitHandle q);

    // --- communicator support ---------------------------------------------
    // Registers one communicator per rank; duplicate registration and size
    // disagreement are errors.
    void register_communicator(int rank, int size);

    void flush(int rank);
    void barrier(int rank);
    std::uint64_t barrier_generation();

    // Emits the single record for a primitives-layer operation.
    void trace_collective(int rank, const std::string& op, int root);

    EprSocket* socket(int a, int b);
    int socket_count() const { return static_cast<int>(sockets_.size()); }
    std::uint64_t pending_pairs(int a, int b, int initiator);

    RankScheduler& scheduler() { return scheduler_; }

    // Engine access for post-run inspection; rank threads must go through
    // the locality-checked operations above instead.
    StateEngine& engine_unlocked() { return engine_; }
    TraceLog& trace_unlocked() { return trace_; }

  private:
    void check_node(int node) const;
    void check_owned(int caller, QubitHandle q) const;

    TopologyConfig config_;
    RankScheduler scheduler_;
    StateEngine engine_;
    TraceLog trace_;

    std::map<std::pair<int, int>, std::deque<ClassicalMessage>> channels_;
    std::map<std::pair<int, int>, std::unique_ptr<EprSocket>> sockets_;
    std::map<int, std::deque<QubitHandle>> ghz_pending_;
    std::uint64_t next_pair_id_ = 1;

    std::vector<bool> comm_registered_;
    std::uint64_t barrier_generation_ = 0;
    int barrier_arrived_ = 0;
};

}  // namespace qmpi
