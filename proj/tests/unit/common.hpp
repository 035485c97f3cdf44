#pragma once

// Helpers shared by the World-level unit suites.

#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qmpi/programs.hpp"
#include "qmpi/runtime.hpp"
#include "../oracle.hpp"

namespace testutil {

using cd = std::complex<double>;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline qmpi::TopologyConfig topo(int size, std::uint64_t seed = 0) {
    qmpi::TopologyConfig c;
    c.size = size;
    c.seed = seed;
    return c;
}

// Keeps the world alive so tests can inspect engine/trace state after the run.
struct WorldRun {
    std::unique_ptr<qmpi::World> world;
    qmpi::RunReport report;
};

inline WorldRun run_world_cfg(const qmpi::TopologyConfig& cfg, const qmpi::ProgramFn& fn,
                              qmpi::SchedulerMode mode = qmpi::SchedulerMode::RoundRobinDeterministic,
                              const std::map<std::string, std::string>& args = {}) {
    auto world = std::make_unique<qmpi::World>(cfg, mode);
    qmpi::RunReport report = world->run(fn, args);
    return WorldRun{std::move(world), std::move(report)};
}

inline WorldRun run_world(int size, const qmpi::ProgramFn& fn, std::uint64_t seed = 0,
                          qmpi::SchedulerMode mode = qmpi::SchedulerMode::RoundRobinDeterministic,
                          const std::map<std::string, std::string>& args = {}) {
    return run_world_cfg(topo(size, seed), fn, mode, args);
}

inline void require_ok(const qmpi::RunReport& report) {
    if (!report.ok) {
        FAIL("run failed: ", report.error);
    }
}

template <typename F>
qmpi::ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const qmpi::Error& e) {
        return e.code();
    }
    FAIL("expected an error, none was thrown");
    return qmpi::ErrorCode::CapacityExceeded;  // unreachable
}

inline void check_amps(const std::vector<cd>& got, const std::vector<cd>& want,
                       double tol = 1e-12) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CAPTURE(i);
        CHECK(std::abs(got[i] - want[i]) <= tol);
    }
}

inline void check_amps(const std::vector<cd>& got, const oracle::State& want,
                       double tol = 1e-12) {
    check_amps(got, want.amps, tol);
}

inline std::vector<const qmpi::TraceRecord*> records_of(const qmpi::TraceLog& trace,
                                                        const std::string& kind) {
    std::vector<const qmpi::TraceRecord*> out;
    for (const auto& rec : trace.records()) {
        if (rec.kind == kind) out.push_back(&rec);
    }
    return out;
}

inline std::string detail(const qmpi::TraceRecord& rec, const std::string& key) {
    for (const auto& [k, v] : rec.details) {
        if (k == key) return v;
    }
    return "";
}

}  // namespace testutil
