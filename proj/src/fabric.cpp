#include "qmpi/fabric.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qmpi {

namespace {

std::pair<int, int> norm_pair(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

std::string join_ints(std::span<const int> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

long long parse_int(const std::string& value, const std::string& key) {
    std::size_t used = 0;
    long long parsed = 0;
    try {
        parsed = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadConfig, "bad integer for " + key + ": '" + value + "'");
    }
    if (used != value.size()) {
        throw Error(ErrorCode::BadConfig, "bad integer for " + key + ": '" + value + "'");
    }
    return parsed;
}

Connectivity parse_connectivity(const std::string& value) {
    Connectivity conn;
    if (value == "mesh") {
        conn.mesh = true;
        return conn;
    }
    if (value.rfind("pairs:", 0) != 0) {
        throw Error(ErrorCode::BadConfig, "connectivity must be 'mesh' or 'pairs:(a,b),...'");
    }
    conn.mesh = false;
    const std::string list = value.substr(6);
    std::size_t pos = 0;
    while (pos < list.size()) {
        if (list[pos] != '(') {
            throw Error(ErrorCode::BadConfig, "expected '(' in connectivity pairs");
        }
        const auto close = list.find(')', pos);
        if (close == std::string::npos) {
            throw Error(ErrorCode::BadConfig, "unterminated pair in connectivity");
        }
        const std::string body = list.substr(pos + 1, close - pos - 1);
        const auto comma = body.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::BadConfig, "pair needs two ranks: (" + body + ")");
        }
        const int a = static_cast<int>(parse_int(trim(body.substr(0, comma)), "connectivity"));
        const int b = static_cast<int>(parse_int(trim(body.substr(comma + 1)), "connectivity"));
        if (a == b) {
            throw Error(ErrorCode::BadConfig, "pair connects a rank to itself");
        }
        conn.pairs.insert(norm_pair(a, b));
        pos = close + 1;
        if (pos < list.size()) {
            if (list[pos] != ',') {
                throw Error(ErrorCode::BadConfig, "expected ',' between connectivity pairs");
            }
            ++pos;
        }
    }
    if (conn.pairs.empty()) {
        throw Error(ErrorCode::BadConfig, "connectivity pair list is empty");
    }
    return conn;
}

}  // namespace

bool Connectivity::connected(int a, int b) const {
    if (a == b) return false;
    return mesh || pairs.count(norm_pair(a, b)) != 0;
}

TopologyConfig parse_topology_text(const std::string& text, std::set<std::string>* seen_keys) {
    TopologyConfig config;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::BadConfig,
                        "expected key=value on line " + std::to_string(line_no));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (seen_keys) seen_keys->insert(key);
        if (key == "size") {
            const long long v = parse_int(value, key);
            if (v < 1) throw Error(ErrorCode::BadConfig, "size must be >= 1");
            config.size = static_cast<int>(v);
        } else if (key == "connectivity") {
            config.connectivity = parse_connectivity(value);
        } else if (key == "qubit_cap") {
            const long long v = parse_int(value, key);
            if (v < 1) throw Error(ErrorCode::BadConfig, "qubit_cap must be >= 1");
            config.qubit_cap = static_cast<int>(v);
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(parse_int(value, key));
        } else {
            throw Error(ErrorCode::BadConfig, "unknown config key: '" + key + "'");
        }
    }
    return config;
}

TopologyConfig parse_topology_file(const std::string& path, std::set<std::string>* seen_keys) {
    std::ifstream f(path);
    if (!f) {
        throw Error(ErrorCode::BadConfig, "cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << f.rdbuf();
    return parse_topology_text(buffer.str(), seen_keys);
}

Fabric::Fabric(const TopologyConfig& config, SchedulerMode mode)
    : config_(config),
      scheduler_(config.size, mode, config.deadlock_timeout),
      engine_(config.qubit_cap, config.seed),
      comm_registered_(config.size, false) {
    if (!config_.connectivity.mesh) {
        for (const auto& [a, b] : config_.connectivity.pairs) {
            if (a < 0 || b >= config_.size) {
                throw Error(ErrorCode::BadConfig,
                            "connectivity pair (" + std::to_string(a) + "," + std::to_string(b) +
                                ") is outside 0.." + std::to_string(config_.size - 1));
            }
        }
    }
    // Sockets exist up front for every connected pair, so each communicator's
    // routing table is a view over shared objects.
    for (int a = 0; a < config_.size; ++a) {
        for (int b = a + 1; b < config_.size; ++b) {
            if (config_.connectivity.connected(a, b)) {
                auto sock = std::make_unique<EprSocket>();
                sock->node_a = a;
                sock->node_b = b;
                sockets_[{a, b}] = std::move(sock);
            }
        }
    }
}

bool Fabric::connected(int a, int b) const { return config_.connectivity.connected(a, b); }

void Fabric::check_node(int node) const {
    if (node < 0 || node >= config_.size) {
        throw Error(ErrorCode::UnknownNode,
                    "rank " + std::to_string(node) + " is outside 0.." +
                        std::to_string(config_.size - 1));
    }
}

void Fabric::check_owned(int caller, QubitHandle q) const {
    const int owner = engine_.owner_of(q);  // DeadHandle if stale
    if (owner != caller) {
        throw Error(ErrorCode::LocalityViolation,
                    "rank " + std::to_string(caller) + " touched qubit " + std::to_string(q.id) +
                        " owned by rank " + std::to_string(owner));
    }
}

void Fabric::csend(int from, int to, ClassicalMessage message) {
    check_node(from);
    check_node(to);
    auto lk = scheduler_.acquire(from);
    channels_[{from, to}].push_back(message);
    trace_.emit(from, "csend",
                {{"to", std::to_string(to)},
                 {"tag", message.tag},
                 {"payload", join_ints(message.payload)}});
    scheduler_.notify(lk);
}

ClassicalMessage Fabric::crecv(int at, int from, const std::string& tag) {
    check_node(at);
    check_node(from);
    auto lk = scheduler_.acquire(at);
    auto& queue = channels_[{from, at}];
    scheduler_.wait(lk, at, [&] { return !queue.empty(); });
    if (queue.front().tag != tag) {
        throw Error(ErrorCode::TagMismatch,
                    "expected tag '" + tag + "' but channel head is '" + queue.front().tag + "'");
    }
    ClassicalMessage message = std::move(queue.front());
    queue.pop_front();
    trace_.emit(at, "crecv",
                {{"from", std::to_string(from)},
                 {"tag", message.tag},
                 {"payload", join_ints(message.payload)}});
    scheduler_.notify(lk);
    return message;
}

QubitHandle Fabric::epr_create(int initiator, int peer) {
    check_node(initiator);
    check_node(peer);
    auto lk = scheduler_.acquire(initiator);
    if (!connected(initiator, peer)) {
        throw Error(ErrorCode::NotConnected,
                    "no entanglement socket between ranks " + std::to_string(initiator) +
                        " and " + std::to_string(peer));
    }
    EprSocket* sock = socket(initiator, peer);
    auto [mine, theirs] = engine_.create_bell(initiator, peer);
    const std::uint64_t pair_id = next_pair_id_++;
    sock->pending[initiator].push_back({pair_id, theirs});
    ++sock->created;
    trace_.emit(initiator, "epr",
                {{"op", "create"},
                 {"peer", std::to_string(peer)},
                 {"pair", std::to_string(pair_id)},
                 {"q", std::to_string(mine.id)}});
    scheduler_.notify(lk);
    return mine;
}

QubitHandle Fabric::epr_recv(int receiver, int initiator) {
    check_node(receiver);
    check_node(initiator);
    auto lk = scheduler_.acquire(receiver);
    if (!connected(receiver, initiator)) {
        throw Error(ErrorCode::NotConnected,
                    "no entanglement socket between ranks " + std::to_string(receiver) + " and " +
                        std::to_string(initiator));
    }
    EprSocket* sock = socket(receiver, initiator);
    auto& queue = sock->pending[initiator];
    scheduler_.wait(lk, receiver, [&] { return !queue.empty(); });
    const EprSocket::PendingHalf half = queue.front();
    queue.pop_front();
    ++sock->received;
    trace_.emit(receiver, "epr",
                {{"op", "recv"},
                 {"peer", std::to_string(initiator)},
                 {"pair", std::to_string(half.pair_id)},
                 {"q", std::to_string(half.handle.id)}});
    scheduler_.notify(lk);
    return half.handle;
}

void Fabric::ghz_create(std::span<const int> owners, int initiator) {
    check_node(initiator);
    auto lk = scheduler_.acquire(initiator);
    bool initiator_in_owners = false;
    for (int owner : owners) {
        check_node(owner);
        if (owner == initiator) initiator_in_owners = true;
    }
    if (!initiator_in_owners) {
        throw Error(ErrorCode::UnknownNode, "GHZ initiator must be among the owners");
    }
    for (int owner : owners) {
        if (owner != initiator && !connected(initiator, owner)) {
            throw Error(ErrorCode::NotConnected,
                        "rank " + std::to_string(owner) + " has no socket to initiator " +
                            std::to_string(initiator));
        }
    }
    auto handles = engine_.create_ghz(owners);
    for (std::size_t i = 0; i < handles.size(); ++i) {
        ghz_pending_[owners[i]].push_back(handles[i]);
    }
    trace_.emit(initiator, "ghz",
                {{"op", "create"}, {"owners", join_ints(owners)}});
    scheduler_.notify(lk);
}

QubitHandle Fabric::ghz_recv(int owner) {
    check_node(owner);
    auto lk = scheduler_.acquire(owner);
    auto& queue = ghz_pending_[owner];
    scheduler_.wait(lk, owner, [&] { return !queue.empty(); });
    const QubitHandle handle = queue.front();
    queue.pop_front();
    trace_.emit(owner, "ghz", {{"op", "recv"}, {"q", std::to_string(handle.id)}});
    scheduler_.notify(lk);
    return handle;
}

QubitHandle Fabric::alloc_qubit(int caller) {
    check_node(caller);
    auto lk = scheduler_.acquire(caller);
    const QubitHandle q = engine_.alloc_qubit(caller);
    trace_.emit(caller, "alloc", {{"q", std::to_string(q.id)}});
    scheduler_.notify(lk);
    return q;
}

void Fabric::apply_gate(int caller, GateKind gate, std::initializer_list<QubitHandle> qubits) {
    check_node(caller);
    auto lk = scheduler_.acquire(caller);
    for (const auto& q : qubits) check_owned(caller, q);
    std::vector<QubitHandle> list(qubits);
    engine_.apply_gate(gate, list);
    std::string ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) ids += ',';
        ids += std::to_string(list[i].id);
    }
    trace_.emit(caller, "gate", {{"g", to_string(gate)}, {"q", ids}});
    scheduler_.notify(lk);
}

int Fabric::measure(int caller, QubitHandle q) {
    check_node(caller);
    auto lk = scheduler_.acquire(caller);
    check_owned(caller, q);
    const int outcome = engine_.measure(q);
    trace_.emit(caller, "measure",
                {{"q", std::to_string(q.id)}, {"m", std::to_string(outcome)}});
    scheduler_.notify(lk);
    return outcome;
}

void Fabric::free_qubit(int caller, QubitHandle q) {
    check_node(caller);
    auto lk = scheduler_.acquire(caller);
    check_owned(caller, q);
    engine_.free_qubit(q);
    trace_.emit(caller, "free", {{"q", std::to_string(q.id)}});
    scheduler_.notify(lk);
}

void Fabric::set_amplitudes(int caller, QubitHandle q, std::complex<double> a0,
                            std::complex<double> a1) {
    check_node(caller);
    auto lk = scheduler_.acquire(caller);
    check_owned(caller, q);
    engine_.set_amplitudes(q, a0, a1);
    std::ostringstream fmt0, fmt1;
    fmt0 << a0.real() << ',' << a0.imag();
    fmt1 << a1.real() << ',' << a1.imag();
    trace_.emit(caller, "gate",
                {{"g", "prep"}, {"q", std::to_string(q.id)}, {"a0", fmt0.str()},
                 {"a1", fmt1.str()}});
    scheduler_.notify(lk);
}

std::vector<std::complex<double>> Fabric::snapshot(int caller,
                                                   std::span<const QubitHandle> qubits) {
    auto lk = scheduler_.acquire(caller);
    return engine_.snapshot_amplitudes(qubits);
}

void Fabric::register_communicator(int rank, int size) {
    check_node(rank);
    auto lk = scheduler_.acquire(rank);
    if (size != config_.size) {
        throw Error(ErrorCode::SizeMismatch,
                    "communicator size " + std::to_string(size) + " but the run has " +
                        std::to_string(config_.size) + " ranks");
    }
    if (comm_registered_[rank]) {
        throw Error(ErrorCode::DuplicateInit,
                    "rank " + std::to_string(rank) + " initialized its communicator twice");
    }
    comm_registered_[rank] = true;
}

void Fabric::flush(int rank) {
    check_node(rank);
    auto lk = scheduler_.acquire(rank);
    trace_.emit(rank, "flush", {});
    scheduler_.notify(lk);
}

void Fabric::barrier(int rank) {
    check_node(rank);
    auto lk = scheduler_.acquire(rank);
    const std::uint64_t my_generation = barrier_generation_;
    ++barrier_arrived_;
    trace_.emit(rank, "barrier", {{"gen", std::to_string(my_generation + 1)}});
    if (barrier_arrived_ == config_.size) {
        barrier_arrived_ = 0;
        ++barrier_generation_;
        scheduler_.notify(lk);
        return;
    }
    scheduler_.notify(lk);
    scheduler_.wait(lk, rank, [&] { return barrier_generation_ > my_generation; });
}

std::uint64_t Fabric::barrier_generation() {
    auto lk = scheduler_.lock_external();
    return barrier_generation_;
}

void Fabric::trace_collective(int rank, const std::string& op, int root) {
    auto lk = scheduler_.acquire(rank);
    trace_.emit(rank, "collective", {{"op", op}, {"root", std::to_string(root)}});
    scheduler_.notify(lk);
}

bool Fabric::qubit_live(QubitHandle q) {
    auto lk = scheduler_.lock_external();
    return engine_.is_live(q);
}

std::uint32_t Fabric::qubit_measure_count(QubitHandle q) {
    auto lk = scheduler_.lock_external();
    return engine_.measure_count(q);
}

EprSocket* Fabric::socket(int a, int b) {
    auto it = sockets_.find(norm_pair(a, b));
    if (it == sockets_.end()) {
        throw Error(ErrorCode::NotConnected,
                    "no entanglement socket between ranks " + std::to_string(a) + " and " +
                        std::to_string(b));
    }
    return it->second.get();
}

std::uint64_t Fabric::pending_pairs(int a, int b, int initiator) {
    auto lk = scheduler_.lock_external();
    return socket(a, b)->pending[initiator].size();
}

}  // namespace qmpi
