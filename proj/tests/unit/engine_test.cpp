#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qmpi/engine.hpp"
#include "../oracle.hpp"

namespace {

using qmpi::Error;
using qmpi::ErrorCode;
using qmpi::GateKind;
using qmpi::QubitHandle;
using qmpi::StateEngine;
using cd = std::complex<double>;

constexpr double kInvSqrt2 = 0.70710678118654752440;

void g1(StateEngine& e, GateKind k, QubitHandle q) { e.apply_gate(k, {&q, 1}); }

void cx(StateEngine& e, QubitHandle control, QubitHandle target) {
    const QubitHandle pair[2] = {control, target};
    e.apply_gate(GateKind::Cnot, {pair, 2});
}

std::vector<cd> snap(const StateEngine& e, std::vector<QubitHandle> qs) {
    return e.snapshot_amplitudes({qs.data(), qs.size()});
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error, none was thrown");
    return ErrorCode::CapacityExceeded;  // unreachable
}

void check_amps(const std::vector<cd>& got, const std::vector<cd>& want, double tol = 1e-12) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CAPTURE(i);
        CHECK(std::abs(got[i] - want[i]) <= tol);
    }
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("first allocation yields the zero state") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    CHECK(e.live_count() == 1);
    CHECK(e.is_live(q));
    CHECK(e.owner_of(q) == 0);
    check_amps(e.amplitudes(), {cd{1, 0}, cd{0, 0}});
}

TEST_CASE("two allocations tensor to a four-amplitude zero state") {
    StateEngine e;
    e.alloc_qubit(0);
    e.alloc_qubit(1);
    check_amps(e.amplitudes(), {cd{1, 0}, cd{0, 0}, cd{0, 0}, cd{0, 0}});
}

TEST_CASE("allocation beyond the qubit cap is rejected") {
    CHECK(qmpi::kDefaultQubitCap == 24);
    CHECK(StateEngine().qubit_cap() == 24);

    StateEngine e(4, 0);
    for (int i = 0; i < 4; ++i) e.alloc_qubit(0);
    CHECK(code_of([&] { e.alloc_qubit(0); }) == ErrorCode::CapacityExceeded);
    CHECK(e.live_count() == 4);
}

TEST_CASE("hadamard puts |0> into an even superposition") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    g1(e, GateKind::H, q);
    check_amps(e.amplitudes(), {cd{kInvSqrt2, 0}, cd{kInvSqrt2, 0}}, 1e-15);
}

TEST_CASE("cnot on a superposed control builds an entangled pair") {
    StateEngine e;
    const QubitHandle c = e.alloc_qubit(0);
    const QubitHandle t = e.alloc_qubit(0);
    g1(e, GateKind::H, c);
    cx(e, c, t);
    check_amps(e.amplitudes(), {cd{kInvSqrt2, 0}, cd{0, 0}, cd{0, 0}, cd{kInvSqrt2, 0}}, 1e-15);
    check_amps(snap(e, {c, t}), {cd{kInvSqrt2, 0}, cd{0, 0}, cd{0, 0}, cd{kInvSqrt2, 0}}, 1e-15);
}

TEST_CASE("self-inverse gates return random states to themselves") {
    std::mt19937 rng(2024);
    StateEngine e(8, 7);
    std::vector<QubitHandle> qs;
    for (int i = 0; i < 3; ++i) qs.push_back(e.alloc_qubit(0));

    for (int trial = 0; trial < 100; ++trial) {
        // Scramble into a fresh random (generically entangled) state.
        for (int step = 0; step < 12; ++step) {
            const int pick = static_cast<int>(rng() % 4);
            const int a = static_cast<int>(rng() % 3);
            int b = static_cast<int>(rng() % 3);
            if (b == a) b = (b + 1) % 3;
            if (pick == 3) {
                cx(e, qs[a], qs[b]);
            } else {
                g1(e, pick == 0 ? GateKind::H : pick == 1 ? GateKind::X : GateKind::Z, qs[a]);
            }
        }
        const std::vector<cd> before = e.amplitudes();

        const int pick = static_cast<int>(rng() % 4);
        const int a = static_cast<int>(rng() % 3);
        int b = static_cast<int>(rng() % 3);
        if (b == a) b = (b + 1) % 3;
        for (int rep = 0; rep < 2; ++rep) {
            if (pick == 3) {
                cx(e, qs[a], qs[b]);
            } else {
                g1(e, pick == 0 ? GateKind::H : pick == 1 ? GateKind::X : GateKind::Z, qs[a]);
            }
        }
        check_amps(e.amplitudes(), before, 1e-12);
    }
}

TEST_CASE("the engine tracks a brute-force reference on random circuits") {
    StateEngine e(6, 99);
    oracle::State ref = oracle::State::zeros(0);
    std::vector<QubitHandle> qs;
    std::mt19937 rng(5);

    auto sync_check = [&] {
        REQUIRE(e.amplitudes().size() == ref.amps.size());
        for (std::size_t i = 0; i < ref.amps.size(); ++i) {
            REQUIRE(std::abs(e.amplitudes()[i] - ref.amps[i]) <= 1e-12);
        }
    };

    for (int i = 0; i < 4; ++i) {
        qs.push_back(e.alloc_qubit(0));
        oracle::append_zero(ref);
    }

    for (int step = 0; step < 300; ++step) {
        const int op = static_cast<int>(rng() % 5);
        const int a = static_cast<int>(rng() % 4);
        int b = static_cast<int>(rng() % 4);
        if (b == a) b = (b + 1) % 4;
        switch (op) {
            case 0: g1(e, GateKind::H, qs[a]); oracle::h(ref, a); break;
            case 1: g1(e, GateKind::X, qs[a]); oracle::x(ref, a); break;
            case 2: g1(e, GateKind::Z, qs[a]); oracle::z(ref, a); break;
            case 3: cx(e, qs[a], qs[b]); oracle::cnot(ref, a, b); break;
            case 4: {
                const int m = e.measure(qs[a]);
                oracle::project(ref, a, m);
                break;
            }
        }
        CHECK(std::abs(e.norm() - 1.0) <= 1e-12);
        if (step % 10 == 0) sync_check();
    }
    sync_check();
}

TEST_CASE("measuring an eigenstate is deterministic") {
    StateEngine e;
    for (int i = 0; i < 20; ++i) {
        const QubitHandle q = e.alloc_qubit(0);
        g1(e, GateKind::X, q);
        CHECK(e.measure(q) == 1);
        e.free_qubit(q);
    }
}

TEST_CASE("measurement statistics follow the squared amplitudes") {
    const int shots = 10000;

    SUBCASE("even superposition") {
        StateEngine e(24, 123);
        int ones = 0;
        for (int i = 0; i < shots; ++i) {
            const QubitHandle q = e.alloc_qubit(0);
            g1(e, GateKind::H, q);
            ones += e.measure(q);
            e.free_qubit(q);
        }
        const double freq = static_cast<double>(ones) / shots;
        CHECK(freq >= 0.5 - 0.015);
        CHECK(freq <= 0.5 + 0.015);
    }

    SUBCASE("biased state") {
        StateEngine e(24, 321);
        const double p = 0.64;
        const double bound = 3.0 * std::sqrt(p * (1.0 - p) / shots);
        int ones = 0;
        for (int i = 0; i < shots; ++i) {
            const QubitHandle q = e.alloc_qubit(0);
            e.set_amplitudes(q, cd{0.6, 0}, cd{0.8, 0});
            ones += e.measure(q);
            e.free_qubit(q);
        }
        const double freq = static_cast<double>(ones) / shots;
        CHECK(std::abs(freq - p) <= bound);
    }
}

TEST_CASE("both halves of an entangled pair always agree") {
    StateEngine e(24, 7);
    int zeros = 0;
    const int shots = 10000;
    for (int i = 0; i < shots; ++i) {
        const auto [a, b] = e.create_bell(0, 1);
        const int ma = e.measure(a);
        const int mb = e.measure(b);
        CHECK(ma == mb);
        zeros += (ma == 0);
        e.free_qubit(a);
        e.free_qubit(b);
    }
    const double freq = static_cast<double>(zeros) / shots;
    CHECK(freq >= 0.5 - 0.015);
    CHECK(freq <= 0.5 + 0.015);
}

TEST_CASE("entangled pairs come out in the even-parity Bell state") {
    StateEngine e;
    const auto [a, b] = e.create_bell(0, 1);
    CHECK(e.owner_of(a) == 0);
    CHECK(e.owner_of(b) == 1);
    check_amps(e.amplitudes(), {cd{kInvSqrt2, 0}, cd{0, 0}, cd{0, 0}, cd{kInvSqrt2, 0}}, 1e-15);
}

TEST_CASE("extending a pair with a cnot gives three correlated bits") {
    StateEngine e(24, 31);
    for (int i = 0; i < 2000; ++i) {
        const auto [a, b] = e.create_bell(0, 1);
        const QubitHandle c = e.alloc_qubit(0);
        cx(e, a, c);
        const int ma = e.measure(a);
        CHECK(e.measure(b) == ma);
        CHECK(e.measure(c) == ma);
        e.free_qubit(a);
        e.free_qubit(b);
        e.free_qubit(c);
    }
}

TEST_CASE("two-owner shared states equal entangled pairs") {
    StateEngine e;
    const std::vector<int> owners = {0, 1};
    const auto qs = e.create_ghz({owners.data(), owners.size()});
    REQUIRE(qs.size() == 2);
    check_amps(e.amplitudes(), {cd{kInvSqrt2, 0}, cd{0, 0}, cd{0, 0}, cd{kInvSqrt2, 0}}, 1e-15);
}

TEST_CASE("three-owner shared states weight only the all-equal strings") {
    StateEngine e;
    const std::vector<int> owners = {0, 1, 2};
    const auto qs = e.create_ghz({owners.data(), owners.size()});
    REQUIRE(qs.size() == 3);
    std::vector<cd> want(8, cd{0, 0});
    want[0] = want[7] = cd{kInvSqrt2, 0};
    check_amps(e.amplitudes(), want, 1e-15);
    for (std::size_t i = 0; i < qs.size(); ++i) CHECK(e.owner_of(qs[i]) == owners[i]);
}

TEST_CASE("five-owner shared states measure all-equal halves of the time") {
    StateEngine e(24, 77);
    const std::vector<int> owners = {0, 1, 2, 3, 4};
    const int shots = 10000;
    int zeros = 0;
    for (int i = 0; i < shots; ++i) {
        const auto qs = e.create_ghz({owners.data(), owners.size()});
        const int first = e.measure(qs[0]);
        for (std::size_t k = 1; k < qs.size(); ++k) CHECK(e.measure(qs[k]) == first);
        zeros += (first == 0);
        for (const auto& q : qs) e.free_qubit(q);
    }
    const double freq = static_cast<double>(zeros) / shots;
    CHECK(freq >= 0.5 - 0.015);
    CHECK(freq <= 0.5 + 0.015);
}

TEST_CASE("shared states need at least two distinct owners") {
    StateEngine e;
    const std::vector<int> one = {0};
    CHECK(code_of([&] { e.create_ghz({one.data(), one.size()}); }) == ErrorCode::TooFewOwners);
    const std::vector<int> dup = {0, 1, 0};
    CHECK(code_of([&] { e.create_ghz({dup.data(), dup.size()}); }) == ErrorCode::DuplicateOwner);
    CHECK(code_of([&] { e.create_bell(2, 2); }) == ErrorCode::DuplicateOwner);
}

TEST_CASE("group allocation respects the cap") {
    StateEngine e(3, 0);
    e.alloc_qubit(0);
    e.alloc_qubit(0);
    const std::vector<int> owners = {0, 1};
    CHECK(code_of([&] { e.create_ghz({owners.data(), owners.size()}); }) ==
          ErrorCode::CapacityExceeded);
    CHECK(code_of([&] { e.create_bell(0, 1); }) == ErrorCode::CapacityExceeded);
}

TEST_CASE("freeing a measured qubit halves the dimension") {
    StateEngine e;
    const QubitHandle a = e.alloc_qubit(0);
    const QubitHandle b = e.alloc_qubit(0);
    g1(e, GateKind::H, a);
    e.measure(a);
    CHECK(e.amplitudes().size() == 4);
    e.free_qubit(a);
    CHECK(e.amplitudes().size() == 2);
    CHECK(std::abs(e.norm() - 1.0) <= 1e-12);
    CHECK(e.live_count() == 1);
    CHECK(!e.is_live(a));
    CHECK(e.is_live(b));
}

TEST_CASE("freeing half of an entangled pair is rejected") {
    StateEngine e;
    const auto [a, b] = e.create_bell(0, 1);
    CHECK(code_of([&] { e.free_qubit(a); }) == ErrorCode::StillEntangled);
    CHECK(e.is_live(a));
}

TEST_CASE("allocate, gate, measure, free leaves a clean slate") {
    StateEngine used(24, 5);
    const QubitHandle q = used.alloc_qubit(0);
    g1(used, GateKind::H, q);
    used.measure(q);
    used.free_qubit(q);
    used.alloc_qubit(0);

    StateEngine fresh;
    fresh.alloc_qubit(0);
    check_amps(used.amplitudes(), fresh.amplitudes());
    CHECK(used.live_count() == fresh.live_count());
}

TEST_CASE("snapshots report reduced states without disturbing the engine") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    check_amps(snap(e, {q}), {cd{1, 0}, cd{0, 0}});

    const auto [a, b] = e.create_bell(0, 1);
    const std::vector<cd> before = e.amplitudes();
    check_amps(snap(e, {a, b}), {cd{kInvSqrt2, 0}, cd{0, 0}, cd{0, 0}, cd{kInvSqrt2, 0}}, 1e-15);
    check_amps(e.amplitudes(), before);
}

TEST_CASE("snapshotting half of an entangled pair is rejected") {
    StateEngine e;
    const auto [a, b] = e.create_bell(0, 1);
    CHECK(code_of([&] { snap(e, {a}); }) == ErrorCode::NotSeparable);
}

TEST_CASE("snapshot queries reject duplicates and empty lists") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    CHECK(code_of([&] { snap(e, {q, q}); }) == ErrorCode::BadAmplitudes);
    CHECK(code_of([&] { snap(e, {}); }) == ErrorCode::BadAmplitudes);
}

TEST_CASE("snapshots fix the global phase") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    e.set_amplitudes(q, cd{-0.6, 0}, cd{-0.8, 0});
    check_amps(snap(e, {q}), {cd{0.6, 0}, cd{0.8, 0}}, 1e-12);

    const QubitHandle r = e.alloc_qubit(0);
    g1(e, GateKind::X, r);
    g1(e, GateKind::Z, r);  // state is now -|1>
    check_amps(snap(e, {r}), {cd{0, 0}, cd{1, 0}}, 1e-12);
}

TEST_CASE("injected amplitudes are normalized on entry") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    e.set_amplitudes(q, cd{3, 0}, cd{4, 0});
    check_amps(snap(e, {q}), {cd{0.6, 0}, cd{0.8, 0}}, 1e-12);
    CHECK(std::abs(e.norm() - 1.0) <= 1e-12);

    CHECK(code_of([&] { e.set_amplitudes(q, cd{0, 0}, cd{0, 0}); }) == ErrorCode::BadAmplitudes);

    const auto [a, b] = e.create_bell(0, 1);
    CHECK(code_of([&] { e.set_amplitudes(a, cd{1, 0}, cd{0, 0}); }) == ErrorCode::NotSeparable);
}

TEST_CASE("norm stays within 1e-12 across one hundred thousand operations") {
    StateEngine e(10, 4242);
    std::mt19937 rng(11);
    std::vector<QubitHandle> live;
    for (int i = 0; i < 6; ++i) live.push_back(e.alloc_qubit(0));

    for (int step = 0; step < 100000; ++step) {
        const int op = static_cast<int>(rng() % 6);
        if (op == 5 && e.live_count() < 10) {
            live.push_back(e.alloc_qubit(0));
        } else if (op == 4 && live.size() > 2) {
            const std::size_t at = rng() % live.size();
            const QubitHandle victim = live[at];
            e.measure(victim);  // collapse so the factor splits off
            e.free_qubit(victim);
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(at));
        } else {
            const std::size_t a = rng() % live.size();
            std::size_t b = rng() % live.size();
            if (b == a) b = (b + 1) % live.size();
            switch (op % 4) {
                case 0: g1(e, GateKind::H, live[a]); break;
                case 1: g1(e, GateKind::X, live[a]); break;
                case 2: g1(e, GateKind::Z, live[a]); break;
                case 3: cx(e, live[a], live[b]); break;
            }
        }
        REQUIRE(std::abs(e.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("identical seeds replay identical runs bit for bit") {
    auto script = [](StateEngine& e, std::vector<int>& outcomes) {
        std::vector<QubitHandle> qs;
        for (int i = 0; i < 4; ++i) qs.push_back(e.alloc_qubit(0));
        for (int round = 0; round < 50; ++round) {
            g1(e, GateKind::H, qs[round % 4]);
            cx(e, qs[round % 4], qs[(round + 1) % 4]);
            outcomes.push_back(e.measure(qs[(round + 1) % 4]));
        }
    };
    StateEngine e1(24, 2718), e2(24, 2718);
    std::vector<int> o1, o2;
    script(e1, o1);
    script(e2, o2);
    CHECK(o1 == o2);
    CHECK(e1.rng_cursor() == e2.rng_cursor());
    REQUIRE(e1.amplitudes().size() == e2.amplitudes().size());
    for (std::size_t i = 0; i < e1.amplitudes().size(); ++i) {
        CHECK(e1.amplitudes()[i] == e2.amplitudes()[i]);
    }
}

TEST_CASE("allocation order relabeling permutes snapshots consistently") {
    StateEngine e1;
    const QubitHandle x1 = e1.alloc_qubit(0);
    const QubitHandle y1 = e1.alloc_qubit(0);
    g1(e1, GateKind::H, x1);
    g1(e1, GateKind::X, y1);

    StateEngine e2;
    const QubitHandle y2 = e2.alloc_qubit(0);  // reversed allocation order
    const QubitHandle x2 = e2.alloc_qubit(0);
    g1(e2, GateKind::H, x2);
    g1(e2, GateKind::X, y2);

    check_amps(snap(e1, {x1, y1}), snap(e2, {x2, y2}), 1e-15);
    check_amps(snap(e1, {y1, x1}), snap(e2, {y2, x2}), 1e-15);
}

TEST_CASE("operations on dead handles are rejected") {
    StateEngine e;
    QubitHandle q = e.alloc_qubit(0);
    e.measure(q);
    e.free_qubit(q);
    CHECK(code_of([&] { g1(e, GateKind::H, q); }) == ErrorCode::DeadHandle);
    CHECK(code_of([&] { e.measure(q); }) == ErrorCode::DeadHandle);
    CHECK(code_of([&] { e.free_qubit(q); }) == ErrorCode::DeadHandle);
    CHECK(code_of([&] { snap(e, {q}); }) == ErrorCode::DeadHandle);
}

TEST_CASE("a cnot needs two distinct qubits") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    CHECK(code_of([&] { cx(e, q, q); }) == ErrorCode::SameQubitCnot);
}

TEST_CASE("measurement keeps the handle alive and advances the draw cursor") {
    StateEngine e;
    const QubitHandle q = e.alloc_qubit(0);
    CHECK(e.rng_cursor() == 0);
    CHECK(e.measure_count(q) == 0);
    g1(e, GateKind::H, q);
    e.measure(q);
    CHECK(e.is_live(q));
    CHECK(e.rng_cursor() == 1);
    CHECK(e.measure_count(q) == 1);
    e.measure(q);
    CHECK(e.rng_cursor() == 2);
    CHECK(e.measure_count(q) == 2);
}

}  // TEST_SUITE("engine")
