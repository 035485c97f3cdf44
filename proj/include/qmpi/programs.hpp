#pragma once

#include "qmpi/runtime.hpp"

namespace qmpi::programs {

// Entry procedures for the bundled demo programs. Each body is SPMD: every
// rank runs the same function and branches only on ctx.rank().

// Prints "Hello, rank=<r> of <n> processes" through the rank's output sink.
void hello(RankContext& ctx);

// Builds an N-party GHZ state collectively and measures it; every rank
// surfaces its bit. Needs at least 2 ranks.
void ghz(RankContext& ctx);

// Two-rank assembly session: rank 0 runs the file named by --asm, rank 1 the
// file named by --peer-asm, each treating the other rank as its peer.
void nqasm_run(RankContext& ctx);

// Registers the above under their launcher names ("hello", "ghz",
// "nqasm-run"). Registering a name twice is an error, so callers that may
// race (tests, embedding hosts) should use ensure_builtin_programs().
void register_builtin_programs();

// register_builtin_programs() on first call, no-op afterwards.
void ensure_builtin_programs();

}  // namespace qmpi::programs
