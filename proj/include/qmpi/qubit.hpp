#pragma once

#include <utility>

#include "qmpi/fabric.hpp"

namespace qmpi {

// Move-only handle a rank program holds on one of its qubits. Copying is
// deleted on purpose: duplicating a qubit reference would invite accidental
// cloning semantics. Destruction does not free the qubit; programs release
// resources explicitly so leaks stay visible to the hygiene checks.
class Qubit {
  public:
    Qubit() = default;
    Qubit(Fabric* fabric, QubitHandle handle, int acting_rank)
        : fabric_(fabric), handle_(handle), rank_(acting_rank), valid_(true) {}

    Qubit(Qubit&& other) noexcept { *this = std::move(other); }
    Qubit& operator=(Qubit&& other) noexcept {
        fabric_ = other.fabric_;
        handle_ = other.handle_;
        rank_ = other.rank_;
        valid_ = other.valid_;
        other.valid_ = false;
        return *this;
    }
    Qubit(const Qubit&) = delete;
    Qubit& operator=(const Qubit&) = delete;

    void h() { fabric().apply_gate(rank_, GateKind::H, {check()}); }
    void x() { fabric().apply_gate(rank_, GateKind::X, {check()}); }
    void z() { fabric().apply_gate(rank_, GateKind::Z, {check()}); }

    // this qubit is the control.
    void cnot(Qubit& target) {
        fabric().apply_gate(rank_, GateKind::Cnot, {check(), target.check()});
    }

    int measure() { return fabric().measure(rank_, check()); }

    void free() {
        fabric().free_qubit(rank_, check());
        valid_ = false;
    }

    bool valid() const { return valid_; }
    QubitHandle handle() const { return handle_; }
    std::uint64_t id() const { return handle_.id; }
    int owner() const { return handle_.owner; }

    // Consumed by qsend and friends.
    void invalidate() { valid_ = false; }

  private:
    Fabric& fabric() {
        check();
        return *fabric_;
    }
    QubitHandle check() const {
        if (!valid_) {
            throw Error(ErrorCode::DeadHandle, "qubit reference was already consumed");
        }
        return handle_;
    }

    Fabric* fabric_ = nullptr;
    QubitHandle handle_{};
    int rank_ = -1;
    bool valid_ = false;
};

}  // namespace qmpi
