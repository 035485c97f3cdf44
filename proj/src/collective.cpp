#include <algorithm>

#include "qmpi/communicator.hpp"

namespace qmpi {

// Collective wire formats, fixed:
//   "scatter-hdr"  root -> each non-root, payload [size], before the teleport
//   "gather-hdr"   root -> each non-root, payload [size], before the peer's
//                  teleport back to root
//   "expose-corr"  root -> each non-root, payload [m] (root share measurement)
//   "unexpose-corr" non-root -> root, payload [m_i] (share measurement)
static constexpr const char* kScatterTag = "scatter-hdr";
static constexpr const char* kGatherTag = "gather-hdr";
static constexpr const char* kExposeTag = "expose-corr";
static constexpr const char* kUnexposeTag = "unexpose-corr";

namespace {

void check_header(const ClassicalMessage& header, int size) {
    if (header.payload.size() != 1 || header.payload[0] != size) {
        throw Error(ErrorCode::SizeMismatch,
                    "collective header announced size " +
                        (header.payload.empty() ? std::string("<none>")
                                                : std::to_string(header.payload[0])) +
                        " but this rank runs in a world of " + std::to_string(size));
    }
}

}  // namespace

std::vector<Qubit> Communicator::qscatter(std::vector<Qubit> qubits, int root) {
    check_rank_arg(root, "root");
    fabric_.trace_collective(rank_, "qscatter", root);

    if (rank_ != root) {
        if (!qubits.empty()) {
            throw Error(ErrorCode::WrongCount,
                        "non-root rank " + std::to_string(rank_) + " passed " +
                            std::to_string(qubits.size()) + " qubits to qscatter");
        }
        check_header(fabric_.crecv(rank_, root, kScatterTag), size_);
        std::vector<Qubit> out;
        out.push_back(qrecv(root));
        return out;
    }

    if (static_cast<int>(qubits.size()) != size_) {
        throw Error(ErrorCode::WrongCount, "qscatter root needs exactly " +
                                               std::to_string(size_) + " qubits, got " +
                                               std::to_string(qubits.size()));
    }
    for (const auto& q : qubits) {
        if (!q.valid() || !fabric_.qubit_live(q.handle())) {
            throw Error(ErrorCode::DeadHandle, "qscatter input is not a live qubit");
        }
        if (q.owner() != rank_) {
            throw Error(ErrorCode::NotOwner, "qscatter root does not own qubit " +
                                                 std::to_string(q.id()));
        }
    }
    for (int peer = 0; peer < size_; ++peer) {
        if (peer == root) continue;
        fabric_.csend(rank_, peer, {kScatterTag, {size_}});
        qsend(std::move(qubits[peer]), peer);
    }
    std::vector<Qubit> out;
    out.push_back(std::move(qubits[root]));  // root's element moves locally
    return out;
}

std::vector<Qubit> Communicator::qgather(Qubit q, int root) {
    check_rank_arg(root, "root");
    fabric_.trace_collective(rank_, "qgather", root);

    if (rank_ != root) {
        check_header(fabric_.crecv(rank_, root, kGatherTag), size_);
        qsend(std::move(q), root);
        return {};
    }

    if (!q.valid() || !fabric_.qubit_live(q.handle())) {
        throw Error(ErrorCode::DeadHandle, "qgather input is not a live qubit");
    }
    if (q.owner() != rank_) {
        throw Error(ErrorCode::NotOwner,
                    "qgather root does not own qubit " + std::to_string(q.id()));
    }
    std::vector<Qubit> out(size_);
    for (int peer = 0; peer < size_; ++peer) {
        if (peer == root) continue;
        fabric_.csend(rank_, peer, {kGatherTag, {size_}});
        out[peer] = qrecv(peer);
    }
    out[root] = std::move(q);
    return out;
}

ExposedContext Communicator::expose(std::vector<Qubit> qubits, int root) {
    check_rank_arg(root, "root");
    if (expose_live_) {
        throw Error(ErrorCode::NestedExpose,
                    "rank " + std::to_string(rank_) + " already holds a live exposed context");
    }
    fabric_.trace_collective(rank_, "expose", root);

    ExposedContext context;
    context.root_ = root;
    context.generation_ = ++expose_generation_;

    if (rank_ == root) {
        if (qubits.size() != 1) {
            throw Error(ErrorCode::WrongCount, "expose root passes exactly 1 data qubit, got " +
                                                   std::to_string(qubits.size()));
        }
        Qubit data = std::move(qubits[0]);
        if (!data.valid() || !fabric_.qubit_live(data.handle())) {
            throw Error(ErrorCode::DeadHandle, "expose data qubit is not live");
        }
        if (data.owner() != rank_) {
            throw Error(ErrorCode::NotOwner, "expose root does not own the data qubit");
        }

        std::vector<int> owners(size_);
        for (int r = 0; r < size_; ++r) owners[r] = r;
        fabric_.ghz_create(owners, root);
        const QubitHandle my_share = fabric_.ghz_recv(rank_);

        fabric_.apply_gate(rank_, GateKind::Cnot, {data.handle(), my_share});
        const int m = fabric_.measure(rank_, my_share);
        fabric_.free_qubit(rank_, my_share);
        for (int peer = 0; peer < size_; ++peer) {
            if (peer != root) fabric_.csend(rank_, peer, {kExposeTag, {m}});
        }
        context.share_ = std::move(data);
    } else {
        if (!qubits.empty()) {
            throw Error(ErrorCode::WrongCount,
                        "non-root rank " + std::to_string(rank_) + " passed " +
                            std::to_string(qubits.size()) + " qubits to expose");
        }
        const QubitHandle share = fabric_.ghz_recv(rank_);
        const ClassicalMessage corr = fabric_.crecv(rank_, root, kExposeTag);
        if (corr.payload.size() != 1) {
            throw Error(ErrorCode::TagMismatch, "expose correction payload must be one bit");
        }
        if (corr.payload[0]) fabric_.apply_gate(rank_, GateKind::X, {share});
        context.share_ = wrap(share);
    }

    context.measure_count_at_expose_ = fabric_.qubit_measure_count(context.share_.handle());
    context.live_ = true;
    expose_live_ = true;
    return context;
}

std::optional<Qubit> Communicator::unexpose(ExposedContext& context, int root) {
    check_rank_arg(root, "root");
    if (!context.live_ || !expose_live_ || context.generation_ != expose_generation_ ||
        context.root_ != root) {
        throw Error(ErrorCode::StaleContext,
                    "exposed context does not match this communicator's live exposure");
    }
    fabric_.trace_collective(rank_, "unexpose", root);

    if (rank_ == root) {
        Qubit data = std::move(context.share_);
        if (!data.valid() || !fabric_.qubit_live(data.handle())) {
            throw Error(ErrorCode::DeadHandle, "exposed data qubit is no longer live");
        }
        int parity = 0;
        for (int peer = 0; peer < size_; ++peer) {
            if (peer == root) continue;
            const ClassicalMessage corr = fabric_.crecv(rank_, peer, kUnexposeTag);
            if (corr.payload.size() != 1) {
                throw Error(ErrorCode::TagMismatch,
                            "unexpose correction payload must be one bit");
            }
            parity ^= corr.payload[0] & 1;
        }
        if (parity) fabric_.apply_gate(rank_, GateKind::Z, {data.handle()});
        context.live_ = false;
        expose_live_ = false;
        return data;
    }

    Qubit share = std::move(context.share_);
    if (!share.valid() || !fabric_.qubit_live(share.handle()) ||
        fabric_.qubit_measure_count(share.handle()) != context.measure_count_at_expose_) {
        throw Error(ErrorCode::ShareTampered,
                    "exposed share of rank " + std::to_string(rank_) +
                        " was measured or freed before unexpose");
    }
    fabric_.apply_gate(rank_, GateKind::H, {share.handle()});
    const int m = fabric_.measure(rank_, share.handle());
    fabric_.free_qubit(rank_, share.handle());
    share.invalidate();
    fabric_.csend(rank_, root, {kUnexposeTag, {m}});
    context.live_ = false;
    expose_live_ = false;
    return std::nullopt;
}

}  // namespace qmpi
