#include <optional>
#include <utility>
#include <vector>

#include "qmpi/programs.hpp"

namespace qmpi::programs {

// Collective GHZ preparation. The root puts its qubit into superposition and
// exposes it across the whole communicator; every other rank copies the
// shared basis information onto a private qubit; the root then takes its
// data qubit back. What remains is one maximally entangled bit per rank,
// which each rank measures and surfaces. The body never mentions the rank
// count: the same source runs unchanged at any -n.
void ghz(RankContext& ctx) {
    const int root = 0;
    Communicator& comm = ctx.comm();

    Qubit mine = ctx.alloc_qubit();

    std::vector<Qubit> exposed;
    if (ctx.rank() == root) {
        mine.h();
        exposed.push_back(std::move(mine));
    }

    ExposedContext shared = comm.expose(std::move(exposed), root);
    if (ctx.rank() != root) {
        shared.share().cnot(mine);
    }

    std::optional<Qubit> returned = comm.unexpose(shared, root);
    Qubit result = returned ? std::move(*returned) : std::move(mine);

    ctx.emit_bit(result.measure());
    result.free();
}

}  // namespace qmpi::programs
