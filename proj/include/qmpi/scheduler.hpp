#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "qmpi/errors.hpp"

namespace qmpi {

enum class SchedulerMode { RoundRobinDeterministic, Concurrent };

const char* to_string(SchedulerMode m);

// Coordinates the rank threads of one run and owns the single lock that
// serializes every engine/fabric commit.
//
// Round-robin-deterministic mode hands a baton around: exactly one rank
// executes at a time and runs until it blocks or finishes, then the baton
// moves to the next runnable rank in cyclic order. Scheduling (and therefore
// the commit order, the random stream, and the trace) is a pure function of
// the program and the seed. A deadlock is detected structurally: once every
// unfinished rank is blocked and nothing has changed since each of them
// blocked, all of them fail with DeadlockTimeout immediately.
//
// Concurrent mode lets rank threads run freely; blocking primitives wait on
// the shared condition variable with a wall-clock deadline.
class RankScheduler {
  public:
    RankScheduler(int size, SchedulerMode mode, double timeout_seconds);

    // Rank thread lifecycle. attach() blocks in deterministic mode until it
    // is this rank's turn; detach() must always run, including on unwind.
    void attach(int rank);
    void detach(int rank) noexcept;

    // Enter a primitive's critical section. Throws Interrupted after a
    // shutdown request, DeadlockTimeout after a detected deadlock.
    std::unique_lock<std::mutex> acquire(int rank);

    // Block until pred() holds. Called with the lock from acquire(); pred is
    // evaluated under the lock. Throws like acquire().
    void wait(std::unique_lock<std::mutex>& lk, int rank, const std::function<bool()>& pred);

    // Record that shared state changed so blocked ranks recheck their
    // predicates.
    void notify(std::unique_lock<std::mutex>& lk);

    // Ask every rank to stop at its next scheduling point.
    void request_shutdown() noexcept;

    // Lock for access from outside any rank thread (post-run inspection).
    std::unique_lock<std::mutex> lock_external();

    SchedulerMode mode() const { return mode_; }

  private:
    enum class RankState { NotStarted, Ready, Running, Blocked, Done };

    // Move the baton to the next rank that can make progress; flags a
    // deadlock when there is none. Lock must be held.
    void pass_baton(int from);
    void throw_if_stopping(int rank) const;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    const SchedulerMode mode_;
    const int size_;
    const std::chrono::duration<double> timeout_;

    int current_ = 0;  // baton holder (deterministic mode)
    std::vector<RankState> state_;
    std::vector<std::uint64_t> blocked_version_;
    std::uint64_t version_ = 1;
    bool shutdown_ = false;
    bool deadlock_ = false;
};

}  // namespace qmpi
