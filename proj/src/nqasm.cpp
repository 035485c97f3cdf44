#include "qmpi/nqasm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <utility>

namespace qmpi::nqasm {

namespace {

using Kind = Operand::Kind;

struct OpcodeInfo {
    Opcode opcode;
    std::vector<Kind> signature;
};

const std::map<std::string, OpcodeInfo>& opcode_table() {
    static const std::map<std::string, OpcodeInfo> table = {
        {"set", {Opcode::Set, {Kind::Register, Kind::Immediate}}},
        {"qalloc", {Opcode::Qalloc, {Kind::Register}}},
        {"init", {Opcode::Init, {Kind::Register}}},
        {"store", {Opcode::Store, {Kind::Immediate, Kind::Address}}},
        {"create_epr",
         {Opcode::CreateEpr,
          {Kind::Immediate, Kind::Immediate, Kind::Immediate, Kind::Immediate, Kind::Address}}},
        {"recv_epr",
         {Opcode::RecvEpr,
          {Kind::Immediate, Kind::Immediate, Kind::Immediate, Kind::Immediate, Kind::Address}}},
        {"wait_all", {Opcode::WaitAll, {Kind::Address}}},
        {"cnot", {Opcode::Cnot, {Kind::Register, Kind::Register}}},
        {"h", {Opcode::H, {Kind::Register}}},
        {"x", {Opcode::X, {Kind::Register, Kind::Register}}},
        {"z", {Opcode::Z, {Kind::Register, Kind::Register}}},
        {"meas", {Opcode::Meas, {Kind::Register, Kind::Register}}},
        {"qfree", {Opcode::Qfree, {Kind::Register}}},
        {"csend_bit", {Opcode::CsendBit, {Kind::Register}}},
        {"crecv_bit", {Opcode::CrecvBit, {Kind::Register}}},
    };
    return table;
}

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

struct Token {
    std::string text;
    int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '#') break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#') {
            ++i;
        }
        tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return tokens;
}

std::string where(const Token& t, int line) {
    return "'" + t.text + "' at line " + std::to_string(line) + ", column " +
           std::to_string(t.column);
}

int checked_stoi(const std::string& digits, const Token& token, int line) {
    try {
        return std::stoi(digits);
    } catch (const std::out_of_range&) {
        throw Error(ErrorCode::BadOperand, "value out of range: " + where(token, line), line);
    }
}

Operand parse_operand(const Token& token, int line) {
    const std::string& text = token.text;
    if (text.size() >= 2 && (text[0] == 'R' || text[0] == 'r')) {
        const std::string digits = text.substr(1);
        if (!all_digits(digits)) {
            throw Error(ErrorCode::BadOperand, "malformed register " + where(token, line), line);
        }
        const int index = checked_stoi(digits, token, line);
        if (index >= kNumRegisters) {
            throw Error(ErrorCode::BadOperand,
                        "register index out of range (R0..R" +
                            std::to_string(kNumRegisters - 1) + "): " + where(token, line),
                        line);
        }
        return {Kind::Register, index};
    }
    if (text[0] == '@') {
        const std::string digits = text.substr(1);
        if (!all_digits(digits)) {
            throw Error(ErrorCode::BadOperand, "malformed address " + where(token, line), line);
        }
        const int addr = checked_stoi(digits, token, line);
        if (addr >= kMemoryCells) {
            throw Error(ErrorCode::BadOperand,
                        "address out of range (@0..@" + std::to_string(kMemoryCells - 1) +
                            "): " + where(token, line),
                        line);
        }
        return {Kind::Address, addr};
    }
    const std::string digits = text[0] == '-' ? text.substr(1) : text;
    if (!all_digits(digits)) {
        throw Error(ErrorCode::BadOperand, "unrecognized operand " + where(token, line), line);
    }
    return {Kind::Immediate, checked_stoi(text, token, line)};
}

const char* kind_name(Kind kind) {
    switch (kind) {
        case Kind::Register: return "register";
        case Kind::Immediate: return "immediate";
        case Kind::Address: return "address";
    }
    return "?";
}

}  // namespace

const char* to_string(Opcode opcode) {
    switch (opcode) {
        case Opcode::Set: return "set";
        case Opcode::Qalloc: return "qalloc";
        case Opcode::Init: return "init";
        case Opcode::Store: return "store";
        case Opcode::CreateEpr: return "create_epr";
        case Opcode::RecvEpr: return "recv_epr";
        case Opcode::WaitAll: return "wait_all";
        case Opcode::Cnot: return "cnot";
        case Opcode::H: return "h";
        case Opcode::X: return "x";
        case Opcode::Z: return "z";
        case Opcode::Meas: return "meas";
        case Opcode::Qfree: return "qfree";
        case Opcode::CsendBit: return "csend_bit";
        case Opcode::CrecvBit: return "crecv_bit";
    }
    return "?";
}

bool structurally_equal(const Instruction& a, const Instruction& b) {
    return a.opcode == b.opcode && a.operands == b.operands;
}

bool structurally_equal(const NqasmProgram& a, const NqasmProgram& b) {
    if (a.instructions.size() != b.instructions.size()) return false;
    for (std::size_t i = 0; i < a.instructions.size(); ++i) {
        if (!structurally_equal(a.instructions[i], b.instructions[i])) return false;
    }
    return true;
}

NqasmProgram parse(const std::string& text) {
    NqasmProgram program;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<Token> tokens = tokenize(line);
        if (tokens.empty()) continue;

        const std::string mnemonic = to_lower(tokens.front().text);
        const auto it = opcode_table().find(mnemonic);
        if (it == opcode_table().end()) {
            throw Error(ErrorCode::UnknownOpcode, where(tokens.front(), line_no), line_no);
        }
        const OpcodeInfo& info = it->second;

        if (tokens.size() - 1 != info.signature.size()) {
            throw Error(ErrorCode::BadArity,
                        mnemonic + " takes " + std::to_string(info.signature.size()) +
                            " operand(s), got " + std::to_string(tokens.size() - 1) +
                            " at line " + std::to_string(line_no),
                        line_no);
        }

        Instruction ins;
        ins.opcode = info.opcode;
        ins.line = line_no;
        ins.column = tokens.front().column;
        for (std::size_t i = 0; i < info.signature.size(); ++i) {
            const Operand op = parse_operand(tokens[i + 1], line_no);
            if (op.kind != info.signature[i]) {
                throw Error(ErrorCode::BadOperand,
                            mnemonic + " operand " + std::to_string(i + 1) + " must be a " +
                                kind_name(info.signature[i]) + ", got " +
                                where(tokens[i + 1], line_no),
                            line_no);
            }
            ins.operands.push_back(op);
        }
        program.instructions.push_back(std::move(ins));
    }
    return program;
}

NqasmProgram parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw Error(ErrorCode::BadLaunchSpec, "cannot open assembly file: " + path);
    }
    std::ostringstream buffer;
    buffer << f.rdbuf();
    return parse(buffer.str());
}

std::string disassemble(const NqasmProgram& program) {
    std::ostringstream out;
    for (const Instruction& ins : program.instructions) {
        out << to_string(ins.opcode);
        for (const Operand& op : ins.operands) {
            out << ' ';
            switch (op.kind) {
                case Kind::Register: out << 'R' << op.value; break;
                case Kind::Address: out << '@' << op.value; break;
                case Kind::Immediate: out << op.value; break;
            }
        }
        out << '\n';
    }
    return out.str();
}

namespace {

// Executor for one rank's program. All quantum/classical effects go through
// the fabric so they interleave and trace exactly like the high-level API.
class Vm {
  public:
    Vm(RankContext& ctx, int peer) : ctx_(ctx), fabric_(ctx.fabric()), peer_(peer) {}

    VmState run(const NqasmProgram& program) {
        for (const Instruction& ins : program.instructions) {
            st_.pc = static_cast<int>(&ins - program.instructions.data());
            try {
                step(ins);
            } catch (const Error& e) {
                if (e.line() >= 0) throw;
                // Re-raise with the source line attached, dropping the code
                // prefix what() already carries so it is not doubled.
                std::string text = e.what();
                const std::string prefix = std::string(qmpi::to_string(e.code())) + ": ";
                if (text.rfind(prefix, 0) == 0) text = text.substr(prefix.size());
                throw Error(e.code(), text, ins.line);
            }
        }
        st_.pc = static_cast<int>(program.instructions.size());
        return std::move(st_);
    }

  private:
    void step(const Instruction& ins) {
        const auto& ops = ins.operands;
        switch (ins.opcode) {
            case Opcode::Set:
                st_.registers[ops[0].value] = ops[1].value;
                break;
            case Opcode::Qalloc: {
                const int id = st_.registers[ops[0].value];
                if (st_.qubit_map.count(id)) {
                    throw Error(ErrorCode::BadOperand,
                                "qubit id " + std::to_string(id) + " is already allocated",
                                ins.line);
                }
                bind(id, fabric_.alloc_qubit(ctx_.rank()));
                break;
            }
            case Opcode::Init:
                live_qubit(ops[0], ins.line);  // fresh qubits are already |0>
                break;
            case Opcode::Store:
                st_.memory[ops[1].value] = ops[0].value;
                break;
            case Opcode::CreateEpr: {
                // The remote-node operand is documentation; the session's
                // peer wins so one file works for any rank pairing.
                bind(next_free_id(), fabric_.epr_create(ctx_.rank(), peer_));
                st_.completed.insert(ops[4].value);
                break;
            }
            case Opcode::RecvEpr: {
                bind(next_free_id(), fabric_.epr_recv(ctx_.rank(), peer_));
                st_.completed.insert(ops[4].value);
                break;
            }
            case Opcode::WaitAll: {
                if (st_.completed.count(ops[0].value)) break;
                // Nothing in this machine can complete the request later, so
                // park the rank; the scheduler turns that into a deadlock
                // report rather than a hang.
                auto lk = fabric_.scheduler().acquire(ctx_.rank());
                fabric_.scheduler().wait(lk, ctx_.rank(), [] { return false; });
                break;
            }
            case Opcode::Cnot:
                fabric_.apply_gate(ctx_.rank(), GateKind::Cnot,
                                   {live_qubit(ops[0], ins.line), live_qubit(ops[1], ins.line)});
                break;
            case Opcode::H:
                fabric_.apply_gate(ctx_.rank(), GateKind::H, {live_qubit(ops[0], ins.line)});
                break;
            case Opcode::X: {
                const QubitHandle q = live_qubit(ops[0], ins.line);
                if (st_.registers[ops[1].value] != 0) {
                    fabric_.apply_gate(ctx_.rank(), GateKind::X, {q});
                }
                break;
            }
            case Opcode::Z: {
                const QubitHandle q = live_qubit(ops[0], ins.line);
                if (st_.registers[ops[1].value] != 0) {
                    fabric_.apply_gate(ctx_.rank(), GateKind::Z, {q});
                }
                break;
            }
            case Opcode::Meas: {
                const int m = fabric_.measure(ctx_.rank(), live_qubit(ops[0], ins.line));
                st_.registers[ops[1].value] = m;
                ctx_.emit_bit(m);
                break;
            }
            case Opcode::Qfree: {
                const int id = st_.registers[ops[0].value];
                const auto it = st_.qubit_map.find(id);
                if (it == st_.qubit_map.end()) {
                    if (st_.freed_ids.count(id)) {
                        throw Error(ErrorCode::DoubleFree,
                                    "qubit id " + std::to_string(id) + " was already freed",
                                    ins.line);
                    }
                    throw Error(ErrorCode::UnallocatedQubit,
                                "qubit id " + std::to_string(id) + " was never allocated",
                                ins.line);
                }
                fabric_.free_qubit(ctx_.rank(), it->second);
                st_.qubit_map.erase(it);
                st_.freed_ids.insert(id);
                break;
            }
            case Opcode::CsendBit:
                fabric_.csend(ctx_.rank(), peer_,
                              {"bit", {st_.registers[ops[0].value] & 1}});
                break;
            case Opcode::CrecvBit: {
                const ClassicalMessage msg = fabric_.crecv(ctx_.rank(), peer_, "bit");
                st_.registers[ops[0].value] = msg.payload.at(0);
                break;
            }
        }
    }

    void bind(int id, QubitHandle handle) {
        st_.qubit_map[id] = handle;
        st_.freed_ids.erase(id);
        st_.ever_used_ids.insert(id);
    }

    int next_free_id() const {
        int id = 0;
        while (st_.ever_used_ids.count(id)) ++id;
        return id;
    }

    QubitHandle live_qubit(const Operand& op, int line) const {
        const int id = st_.registers[op.value];
        const auto it = st_.qubit_map.find(id);
        if (it == st_.qubit_map.end()) {
            throw Error(ErrorCode::UnallocatedQubit,
                        "register R" + std::to_string(op.value) + " holds qubit id " +
                            std::to_string(id) + " which is not allocated",
                        line);
        }
        return it->second;
    }

    RankContext& ctx_;
    Fabric& fabric_;
    int peer_;
    VmState st_;
};

}  // namespace

VmState execute(const NqasmProgram& program, RankContext& ctx, int peer) {
    if (peer < 0 || peer >= ctx.size()) {
        throw Error(ErrorCode::UnknownNode, "peer rank " + std::to_string(peer) +
                                                " outside [0, " + std::to_string(ctx.size()) +
                                                ")");
    }
    if (peer == ctx.rank()) {
        throw Error(ErrorCode::SelfSend, "a rank cannot be its own assembly peer");
    }
    return Vm(ctx, peer).run(program);
}

}  // namespace qmpi::nqasm
