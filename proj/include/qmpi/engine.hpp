#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "qmpi/errors.hpp"

namespace qmpi {

inline constexpr int kDefaultQubitCap = 24;

// Tolerance for deciding that a qubit (or set of qubits) factors out of the
// global state. Deliberately far above the 1e-12 numerical noise floor.
inline constexpr double kSeparabilityTol = 1e-9;

enum class GateKind { H, X, Z, Cnot };

const char* to_string(GateKind g);

// Opaque reference to one live qubit. The id is unique for the lifetime of an
// engine and is never reused; owner is the logical rank the qubit belongs to.
struct QubitHandle {
    std::uint64_t id = 0;
    int owner = -1;
};

inline bool operator==(const QubitHandle& a, const QubitHandle& b) { return a.id == b.id; }
inline bool operator!=(const QubitHandle& a, const QubitHandle& b) { return a.id != b.id; }

// Global state-vector simulator backing every rank in a run. All qubits live
// in one amplitude vector regardless of which rank owns them; ownership is
// bookkeeping that the fabric layer uses to reject cross-rank gates. Calls
// must be externally serialized (the fabric holds one lock around the engine).
//
// Amplitude layout: the i-th allocated live qubit sits at bit position i of
// the basis index (position 0 is the least significant bit). Freeing a qubit
// shifts higher positions down by one. snapshot_amplitudes() orders its
// result by the query list, first handle most significant.
class StateEngine {
  public:
    explicit StateEngine(int qubit_cap = kDefaultQubitCap, std::uint64_t seed = 0);

    // Fresh qubit in |0>. Throws CapacityExceeded when the cap is reached.
    QubitHandle alloc_qubit(int owner);

    // H/X/Z take one handle, Cnot takes {control, target}.
    void apply_gate(GateKind gate, std::span<const QubitHandle> qubits);

    // Born-rule measurement in the computational basis, drawn from the seeded
    // stream. Collapses and renormalizes; the handle stays live.
    int measure(QubitHandle q);

    // Removes a qubit that factors out of the joint state (always true right
    // after measurement). Throws StillEntangled otherwise.
    void free_qubit(QubitHandle q);

    // (|00> + |11>)/sqrt(2), one half per owner.
    std::pair<QubitHandle, QubitHandle> create_bell(int owner_a, int owner_b);

    // (|0...0> + |1...1>)/sqrt(2) across owners.size() fresh qubits.
    std::vector<QubitHandle> create_ghz(std::span<const int> owners);

    // Reduced amplitude vector over the listed qubits, which must be jointly
    // separable from everything else. Global phase is canonicalized: the
    // first nonzero amplitude is made real and positive. Read-only except for
    // no state change; exists for tests and observability.
    std::vector<std::complex<double>> snapshot_amplitudes(std::span<const QubitHandle> qubits) const;

    // State injection for tests: overwrite a separable qubit's factor with
    // (a0, a1), normalized. Same plumbing status as snapshot_amplitudes.
    void set_amplitudes(QubitHandle q, std::complex<double> a0, std::complex<double> a1);

    bool is_live(QubitHandle q) const;
    int owner_of(QubitHandle q) const;

    // How many times the qubit has been measured since allocation. Used by
    // the collective layer to detect tampered shares.
    std::uint32_t measure_count(QubitHandle q) const;

    int live_count() const { return static_cast<int>(order_.size()); }
    int qubit_cap() const { return cap_; }

    // Number of random draws committed so far.
    std::uint64_t rng_cursor() const { return rng_cursor_; }

    // Diagnostics for property tests.
    double norm() const;
    const std::vector<std::complex<double>>& amplitudes() const { return amps_; }
    int bit_position(QubitHandle q) const;

  private:
    struct Slot {
        int position;
        int owner;
        std::uint32_t measure_count = 0;
    };

    struct Reduction {
        std::vector<std::complex<double>> factor;  // over the queried qubits
        std::vector<std::complex<double>> rest;    // projection onto the factor
        double residual;                           // 0 when exactly separable
    };

    const Slot& slot(QubitHandle q) const;
    Slot& slot(QubitHandle q);
    double next_uniform();
    QubitHandle append_qubit(int owner);

    // Factor the state as (rest) x (queried qubits). positions lists the bit
    // position of each queried qubit, most significant first.
    Reduction reduce(const std::vector<int>& positions) const;

    std::vector<std::complex<double>> amps_;
    std::unordered_map<std::uint64_t, Slot> slots_;
    std::vector<std::uint64_t> order_;  // bit position -> qubit id
    std::uint64_t next_id_ = 1;
    int cap_;
    std::mt19937_64 rng_;
    std::uint64_t rng_cursor_ = 0;
};

}  // namespace qmpi
