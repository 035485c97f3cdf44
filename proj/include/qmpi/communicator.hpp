#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qmpi/qubit.hpp"

namespace qmpi {

class Communicator;

// Live handle returned by expose(). On the root it carries the original data
// qubit; on every other rank it carries that rank's entangled share, which
// may receive gates (and nothing else) until unexpose() consumes it.
class ExposedContext {
  public:
    Qubit& share() { return share_; }
    int root() const { return root_; }
    bool live() const { return live_; }

  private:
    friend class Communicator;
    Qubit share_;
    int root_ = -1;
    std::uint64_t generation_ = 0;
    std::uint32_t measure_count_at_expose_ = 0;
    bool live_ = false;
};

// Per-rank endpoint of the run-wide message-passing world. Construction is
// the init handshake: it must happen exactly once per rank, with the size
// every other rank agreed on, and it eagerly binds the full routing table of
// entanglement sockets this rank may use.
class Communicator {
  public:
    Communicator(int rank, int size, Fabric& fabric);

    int rank() const { return rank_; }
    int size() const { return size_; }
    Fabric& fabric() { return fabric_; }

    // Commit fence. Operations commit eagerly, so this only marks the trace;
    // calling it any number of times is safe.
    void flush();

    // Blocks until every rank of the run arrives at the same generation.
    void barrier();

    void csend(int to, ClassicalMessage message);
    ClassicalMessage crecv(int from, const std::string& tag);

    // --- point-to-point (p2p.cpp) ------------------------------------------
    // Teleports the payload to dest: fresh entangled pair toward dest, local
    // CNOT(payload -> half) and H(payload), two measurements, correction bits
    // on tag "teleport-corr" with payload [m1, m2], then both local qubits
    // are freed. Returns once the classical send is enqueued.
    void qsend(Qubit payload, int dest);

    // Receives one teleported qubit from source: takes the pending entangled
    // half, waits for the correction bits, applies X^m2 then Z^m1.
    Qubit qrecv(int source);

    // --- collectives (collective.cpp) ---------------------------------------
    // Root distributes qubits[i] to rank i (its own element stays local); every
    // rank gets back the one qubit addressed to it.
    std::vector<Qubit> qscatter(std::vector<Qubit> qubits, int root);

    // Inverse of qscatter: every rank contributes one qubit; root gets all of
    // them, indexed by source rank.
    std::vector<Qubit> qgather(Qubit q, int root);

    // Entangles the root's single data qubit across all ranks so that
    // a|0> + b|1> becomes a|0...0> + b|1...1> with one share per rank. Root
    // passes exactly one qubit; other ranks pass none.
    ExposedContext expose(std::vector<Qubit> qubits, int root);

    // Disentangles the shares and returns the data qubit (root only) in its
    // original single-qubit state, up to global phase.
    std::optional<Qubit> unexpose(ExposedContext& context, int root);

    // Socket routing table, one shared entry per connected peer.
    const std::map<int, EprSocket*>& epr_table() const { return epr_table_; }

  private:
    Qubit wrap(QubitHandle h) { return Qubit(&fabric_, h, rank_); }
    void check_rank_arg(int value, const char* what) const;

    int rank_;
    int size_;
    Fabric& fabric_;
    std::map<int, EprSocket*> epr_table_;

    std::uint64_t expose_generation_ = 0;
    bool expose_live_ = false;
};

}  // namespace qmpi
