#include "qmpi/communicator.hpp"

namespace qmpi {

// Teleportation wire format, shared with qrecv: one classical message on tag
// "teleport-corr" whose payload is exactly [m1, m2], where m1 is the payload
// measurement after H and m2 is the sender-half measurement.
static constexpr const char* kTeleportTag = "teleport-corr";

void Communicator::qsend(Qubit payload, int dest) {
    check_rank_arg(dest, "destination");
    if (dest == rank_) {
        throw Error(ErrorCode::SelfSend, "qsend to own rank " + std::to_string(rank_));
    }
    if (!payload.valid() || !fabric_.qubit_live(payload.handle())) {
        throw Error(ErrorCode::DeadHandle, "qsend payload is not a live qubit");
    }
    if (payload.owner() != rank_) {
        throw Error(ErrorCode::NotOwner,
                    "rank " + std::to_string(rank_) + " does not own qubit " +
                        std::to_string(payload.id()));
    }

    const QubitHandle half = fabric_.epr_create(rank_, dest);
    fabric_.apply_gate(rank_, GateKind::Cnot, {payload.handle(), half});
    fabric_.apply_gate(rank_, GateKind::H, {payload.handle()});
    const int m1 = fabric_.measure(rank_, payload.handle());
    const int m2 = fabric_.measure(rank_, half);
    fabric_.csend(rank_, dest, {kTeleportTag, {m1, m2}});
    fabric_.free_qubit(rank_, payload.handle());
    fabric_.free_qubit(rank_, half);
    payload.invalidate();
}

Qubit Communicator::qrecv(int source) {
    check_rank_arg(source, "source");
    if (source == rank_) {
        throw Error(ErrorCode::SelfSend, "qrecv from own rank " + std::to_string(rank_));
    }

    const QubitHandle half = fabric_.epr_recv(rank_, source);
    const ClassicalMessage corr = fabric_.crecv(rank_, source, kTeleportTag);
    if (corr.payload.size() != 2) {
        throw Error(ErrorCode::TagMismatch,
                    "teleport correction payload has " + std::to_string(corr.payload.size()) +
                        " entries, expected 2");
    }
    // Correction order matters only up to global phase, but the protocol is
    // pinned: X for the half measurement first, then Z for the payload one.
    if (corr.payload[1]) fabric_.apply_gate(rank_, GateKind::X, {half});
    if (corr.payload[0]) fabric_.apply_gate(rank_, GateKind::Z, {half});
    return wrap(half);
}

}  // namespace qmpi
