#include "qmpi/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qmpi {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

const char* to_string(GateKind g) {
    switch (g) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Z: return "Z";
        case GateKind::Cnot: return "CNOT";
    }
    return "?";
}

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CapacityExceeded: return "CapacityExceeded";
        case ErrorCode::DeadHandle: return "DeadHandle";
        case ErrorCode::SameQubitCnot: return "SameQubitCnot";
        case ErrorCode::StillEntangled: return "StillEntangled";
        case ErrorCode::NotSeparable: return "NotSeparable";
        case ErrorCode::TooFewOwners: return "TooFewOwners";
        case ErrorCode::DuplicateOwner: return "DuplicateOwner";
        case ErrorCode::BadAmplitudes: return "BadAmplitudes";
        case ErrorCode::NotConnected: return "NotConnected";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::TagMismatch: return "TagMismatch";
        case ErrorCode::DeadlockTimeout: return "DeadlockTimeout";
        case ErrorCode::LocalityViolation: return "LocalityViolation";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::DuplicateInit: return "DuplicateInit";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::NotOwner: return "NotOwner";
        case ErrorCode::SelfSend: return "SelfSend";
        case ErrorCode::WrongCount: return "WrongCount";
        case ErrorCode::NestedExpose: return "NestedExpose";
        case ErrorCode::StaleContext: return "StaleContext";
        case ErrorCode::ShareTampered: return "ShareTampered";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::UnknownProgram: return "UnknownProgram";
        case ErrorCode::RankPanic: return "RankPanic";
        case ErrorCode::GlobalDeadlock: return "GlobalDeadlock";
        case ErrorCode::Interrupted: return "Interrupted";
        case ErrorCode::BadLaunchSpec: return "BadLaunchSpec";
        case ErrorCode::UnknownOpcode: return "UnknownOpcode";
        case ErrorCode::BadArity: return "BadArity";
        case ErrorCode::BadOperand: return "BadOperand";
        case ErrorCode::UnallocatedQubit: return "UnallocatedQubit";
        case ErrorCode::DoubleFree: return "DoubleFree";
    }
    return "UnknownError";
}

StateEngine::StateEngine(int qubit_cap, std::uint64_t seed) : cap_(qubit_cap), rng_(seed) {
    amps_.assign(1, {1.0, 0.0});
}

const StateEngine::Slot& StateEngine::slot(QubitHandle q) const {
    auto it = slots_.find(q.id);
    if (it == slots_.end()) {
        throw Error(ErrorCode::DeadHandle, "qubit " + std::to_string(q.id) + " is not live");
    }
    return it->second;
}

StateEngine::Slot& StateEngine::slot(QubitHandle q) {
    return const_cast<Slot&>(static_cast<const StateEngine*>(this)->slot(q));
}

double StateEngine::next_uniform() {
    ++rng_cursor_;
    // 53-bit mantissa draw; bit-stable across platforms, unlike
    // std::uniform_real_distribution.
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

QubitHandle StateEngine::append_qubit(int owner) {
    const int k = live_count();
    if (k >= cap_) {
        throw Error(ErrorCode::CapacityExceeded,
                    "qubit cap " + std::to_string(cap_) + " reached");
    }
    QubitHandle h{next_id_++, owner};
    slots_[h.id] = Slot{k, owner, 0};
    order_.push_back(h.id);
    // The new qubit occupies the top bit position in |0>, so the upper half
    // of the doubled vector is all zeros.
    amps_.resize(amps_.size() * 2, {0.0, 0.0});
    return h;
}

QubitHandle StateEngine::alloc_qubit(int owner) { return append_qubit(owner); }

void StateEngine::apply_gate(GateKind gate, std::span<const QubitHandle> qubits) {
    const std::size_t expected = gate == GateKind::Cnot ? 2 : 1;
    if (qubits.size() != expected) {
        throw Error(ErrorCode::BadAmplitudes,
                    std::string(to_string(gate)) + " takes " + std::to_string(expected) +
                        " qubit(s), got " + std::to_string(qubits.size()));
    }
    for (const auto& q : qubits) slot(q);  // DeadHandle check

    if (gate == GateKind::Cnot) {
        if (qubits[0] == qubits[1]) {
            throw Error(ErrorCode::SameQubitCnot, "control and target are the same qubit");
        }
        const std::size_t cb = 1ull << slot(qubits[0]).position;
        const std::size_t tb = 1ull << slot(qubits[1]).position;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cb) && !(i & tb)) std::swap(amps_[i], amps_[i | tb]);
        }
        return;
    }

    const std::size_t bit = 1ull << slot(qubits[0]).position;
    switch (gate) {
        case GateKind::H:
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                if (!(i & bit)) {
                    const auto a = amps_[i];
                    const auto b = amps_[i | bit];
                    amps_[i] = (a + b) * kInvSqrt2;
                    amps_[i | bit] = (a - b) * kInvSqrt2;
                }
            }
            break;
        case GateKind::X:
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                if (!(i & bit)) std::swap(amps_[i], amps_[i | bit]);
            }
            break;
        case GateKind::Z:
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                if (i & bit) amps_[i] = -amps_[i];
            }
            break;
        case GateKind::Cnot:
            break;  // handled above
    }
}

int StateEngine::measure(QubitHandle q) {
    Slot& s = slot(q);
    const std::size_t bit = 1ull << s.position;
    double p1 = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) p1 += std::norm(amps_[i]);
    }
    p1 = std::min(1.0, std::max(0.0, p1));
    const int outcome = next_uniform() < p1 ? 1 : 0;
    const double keep = outcome ? p1 : 1.0 - p1;
    const double scale = 1.0 / std::sqrt(keep);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const bool hit = (i & bit) != 0;
        if (hit == (outcome == 1)) {
            amps_[i] *= scale;
        } else {
            amps_[i] = {0.0, 0.0};
        }
    }
    ++s.measure_count;
    return outcome;
}

StateEngine::Reduction StateEngine::reduce(const std::vector<int>& positions) const {
    const int k = live_count();
    const int m = static_cast<int>(positions.size());
    std::set<int> queried(positions.begin(), positions.end());

    std::vector<int> others;
    for (int p = 0; p < k; ++p) {
        if (!queried.count(p)) others.push_back(p);
    }

    const std::size_t rows = 1ull << others.size();
    const std::size_t cols = 1ull << m;
    std::vector<std::complex<double>> mat(rows * cols);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        std::size_t r = 0;
        for (std::size_t j = 0; j < others.size(); ++j) {
            r |= ((i >> others[j]) & 1ull) << j;
        }
        std::size_t c = 0;
        for (int j = 0; j < m; ++j) {
            c |= ((i >> positions[j]) & 1ull) << (m - 1 - j);
        }
        mat[r * cols + c] = amps_[i];
    }

    // Best rank-one approximation check: take the dominant row as the factor
    // candidate, then see how much of the total weight its direction carries.
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double n = 0.0;
        for (std::size_t c = 0; c < cols; ++c) n += std::norm(mat[r * cols + c]);
        if (n > best_norm) {
            best_norm = n;
            best = r;
        }
    }

    Reduction out;
    out.factor.resize(cols);
    const double inv = 1.0 / std::sqrt(best_norm);
    for (std::size_t c = 0; c < cols; ++c) out.factor[c] = mat[best * cols + c] * inv;

    out.rest.resize(rows);
    double captured = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        std::complex<double> proj = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            proj += std::conj(out.factor[c]) * mat[r * cols + c];
        }
        out.rest[r] = proj;
        captured += std::norm(proj);
    }
    out.residual = std::max(0.0, 1.0 - captured);
    return out;
}

void StateEngine::free_qubit(QubitHandle q) {
    const Slot s = slot(q);
    Reduction red = reduce({s.position});
    if (red.residual > kSeparabilityTol) {
        throw Error(ErrorCode::StillEntangled,
                    "qubit " + std::to_string(q.id) + " is entangled with the rest of the state");
    }

    double n = 0.0;
    for (const auto& a : red.rest) n += std::norm(a);
    const double inv = 1.0 / std::sqrt(n);
    amps_.resize(red.rest.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] = red.rest[i] * inv;

    slots_.erase(q.id);
    order_.erase(order_.begin() + s.position);
    for (auto& [id, sl] : slots_) {
        if (sl.position > s.position) --sl.position;
    }
}

std::pair<QubitHandle, QubitHandle> StateEngine::create_bell(int owner_a, int owner_b) {
    const int owners[2] = {owner_a, owner_b};
    auto handles = create_ghz(owners);
    return {handles[0], handles[1]};
}

std::vector<QubitHandle> StateEngine::create_ghz(std::span<const int> owners) {
    if (owners.size() < 2) {
        throw Error(ErrorCode::TooFewOwners,
                    "GHZ needs at least 2 owners, got " + std::to_string(owners.size()));
    }
    std::set<int> distinct(owners.begin(), owners.end());
    if (distinct.size() != owners.size()) {
        throw Error(ErrorCode::DuplicateOwner, "owner list contains a repeated rank");
    }
    const int n = static_cast<int>(owners.size());
    if (live_count() + n > cap_) {
        throw Error(ErrorCode::CapacityExceeded,
                    "qubit cap " + std::to_string(cap_) + " reached");
    }

    const std::size_t old_size = amps_.size();
    std::vector<QubitHandle> handles;
    handles.reserve(owners.size());
    for (int owner : owners) handles.push_back(append_qubit(owner));

    // append_qubit left the new block in |0...0>; move half the weight to the
    // all-ones block.
    const std::size_t all_ones_base = amps_.size() - old_size;
    for (std::size_t i = 0; i < old_size; ++i) {
        const auto a = amps_[i] * kInvSqrt2;
        amps_[i] = a;
        amps_[all_ones_base + i] = a;
    }
    return handles;
}

std::vector<std::complex<double>> StateEngine::snapshot_amplitudes(
    std::span<const QubitHandle> qubits) const {
    if (qubits.empty()) {
        throw Error(ErrorCode::BadAmplitudes, "snapshot of zero qubits");
    }
    std::vector<int> positions;
    positions.reserve(qubits.size());
    std::set<std::uint64_t> seen;
    for (const auto& q : qubits) {
        positions.push_back(slot(q).position);
        if (!seen.insert(q.id).second) {
            throw Error(ErrorCode::BadAmplitudes,
                        "qubit " + std::to_string(q.id) + " listed twice in snapshot");
        }
    }

    Reduction red = reduce(positions);
    if (red.residual > kSeparabilityTol) {
        throw Error(ErrorCode::NotSeparable,
                    "queried qubits are entangled with the rest of the state");
    }

    // Canonical global phase: first nonzero amplitude real and positive.
    for (const auto& a : red.factor) {
        const double mag = std::abs(a);
        if (mag > kSeparabilityTol) {
            const std::complex<double> rot = std::conj(a) / mag;
            for (auto& v : red.factor) v *= rot;
            break;
        }
    }
    return std::move(red.factor);
}

void StateEngine::set_amplitudes(QubitHandle q, std::complex<double> a0,
                                 std::complex<double> a1) {
    const double n = std::sqrt(std::norm(a0) + std::norm(a1));
    if (n < 1e-12) {
        throw Error(ErrorCode::BadAmplitudes, "zero-norm amplitude pair");
    }
    a0 /= n;
    a1 /= n;

    const Slot& s = slot(q);
    Reduction red = reduce({s.position});
    if (red.residual > kSeparabilityTol) {
        throw Error(ErrorCode::NotSeparable,
                    "cannot inject state into an entangled qubit");
    }
    double rest_norm = 0.0;
    for (const auto& a : red.rest) rest_norm += std::norm(a);
    const double inv = 1.0 / std::sqrt(rest_norm);

    const std::size_t bit = 1ull << s.position;
    const std::size_t low_mask = bit - 1;
    for (std::size_t r = 0; r < red.rest.size(); ++r) {
        const std::size_t base = ((r & ~low_mask) << 1) | (r & low_mask);
        const auto rest = red.rest[r] * inv;
        amps_[base] = rest * a0;
        amps_[base | bit] = rest * a1;
    }
}

bool StateEngine::is_live(QubitHandle q) const { return slots_.count(q.id) != 0; }

int StateEngine::owner_of(QubitHandle q) const { return slot(q).owner; }

std::uint32_t StateEngine::measure_count(QubitHandle q) const { return slot(q).measure_count; }

double StateEngine::norm() const {
    double n = 0.0;
    for (const auto& a : amps_) n += std::norm(a);
    return n;
}

int StateEngine::bit_position(QubitHandle q) const { return slot(q).position; }

}  // namespace qmpi
