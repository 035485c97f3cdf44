#include <mutex>
#include <string>

#include "qmpi/nqasm.hpp"
#include "qmpi/programs.hpp"

namespace qmpi::programs {

void hello(RankContext& ctx) {
    ctx.print("Hello, rank=" + std::to_string(ctx.rank()) + " of " +
              std::to_string(ctx.size()) + " processes");
}

void nqasm_run(RankContext& ctx) {
    if (ctx.size() != 2) {
        throw Error(ErrorCode::BadLaunchSpec, "the assembly runner needs exactly 2 ranks (-n 2)");
    }
    const std::string path = ctx.arg(ctx.rank() == 0 ? "asm" : "peer-asm");
    const nqasm::NqasmProgram program = nqasm::parse_file(path);
    const int peer = 1 - ctx.rank();
    nqasm::execute(program, ctx, peer);
    ctx.print("executed " + std::to_string(program.instructions.size()) + " instructions from " +
              path);
}

void register_builtin_programs() {
    register_program("hello", hello);
    register_program("ghz", ghz);
    register_program("nqasm-run", nqasm_run);
}

void ensure_builtin_programs() {
    static std::once_flag once;
    std::call_once(once, register_builtin_programs);
}

}  // namespace qmpi::programs
