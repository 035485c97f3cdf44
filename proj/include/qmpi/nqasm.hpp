#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qmpi/runtime.hpp"

// A small register-machine assembly dialect for two-party quantum network
// programs, executed against the same fabric as the high-level API. Text
// format: one instruction per line, whitespace-separated operands, `#` starts
// a comment. Operands are registers (R0..R15, case-insensitive on input),
// memory addresses (@0..@255), or decimal immediates.
namespace qmpi::nqasm {

inline constexpr int kNumRegisters = 16;
inline constexpr int kMemoryCells = 256;

enum class Opcode {
    Set,        // set Rd imm       : Rd = imm
    Qalloc,     // qalloc Rq        : allocate a fresh |0> qubit under id Rq's value
    Init,       // init Rq          : assert the qubit exists; fresh qubits are |0>
    Store,      // store imm @a     : memory[a] = imm
    CreateEpr,  // create_epr i i i i @a : request one entangled pair toward the
                //                    peer; the local half is bound to the
                //                    smallest never-used qubit id and completion
                //                    is recorded at @a. The first operand names
                //                    the remote node but execution overrides it
                //                    with the session peer; the rest are the
                //                    socket id and two reserved zeros.
    RecvEpr,    // recv_epr i i i i @a : receive the matching half (blocks)
    WaitAll,    // wait_all @a      : block until the request at @a completed
    Cnot,       // cnot Rc Rt       : CNOT, control = qubit Rc, target = qubit Rt
    H,          // h Rq             : Hadamard
    X,          // x Rq Rc          : bit flip on qubit Rq iff register Rc != 0
    Z,          // z Rq Rc          : phase flip on qubit Rq iff register Rc != 0
    Meas,       // meas Rq Rd       : measure qubit Rq, outcome bit into Rd
    Qfree,      // qfree Rq         : release the measured/separable qubit
    CsendBit,   // csend_bit Rs     : send Rs's low bit to the peer (tag "bit")
    CrecvBit,   // crecv_bit Rd     : receive one bit from the peer into Rd
};

const char* to_string(Opcode opcode);

struct Operand {
    enum class Kind { Register, Immediate, Address };
    Kind kind = Kind::Immediate;
    int value = 0;

    bool operator==(const Operand&) const = default;
};

struct Instruction {
    Opcode opcode;
    std::vector<Operand> operands;
    int line = 0;    // 1-based source line
    int column = 0;  // 1-based column of the opcode token
};

struct NqasmProgram {
    std::vector<Instruction> instructions;
};

// Equality up to source locations; what the round-trip guarantee preserves.
bool structurally_equal(const Instruction& a, const Instruction& b);
bool structurally_equal(const NqasmProgram& a, const NqasmProgram& b);

// Errors: UnknownOpcode, BadArity, BadOperand, each carrying the source line.
NqasmProgram parse(const std::string& text);
NqasmProgram parse_file(const std::string& path);

// Canonical text: lowercase opcodes, "R<n>"/"@<n>"/decimal operands, no
// comments. parse(disassemble(p)) is structurally equal to p.
std::string disassemble(const NqasmProgram& program);

// Machine state left behind by execute(), exposed for inspection.
struct VmState {
    std::array<int, kNumRegisters> registers{};
    std::array<int, kMemoryCells> memory{};
    std::map<int, QubitHandle> qubit_map;  // live qubits keyed by program-level id
    std::set<int> freed_ids;               // ids whose qubit was qfree'd
    std::set<int> ever_used_ids;           // feeds the smallest-never-used binding rule
    std::set<int> completed;               // addresses whose pair request finished
    int pc = 0;                            // index of the next instruction
};

// Runs the program sequentially on the calling rank, with `peer` as the
// remote endpoint for pair generation and bit channels. Measurement outcomes
// also flow into the context's bit sink. Runtime errors carry the line of
// the failing instruction.
VmState execute(const NqasmProgram& program, RankContext& ctx, int peer);

}  // namespace qmpi::nqasm
