#include "qmpi/scheduler.hpp"

namespace qmpi {

const char* to_string(SchedulerMode m) {
    switch (m) {
        case SchedulerMode::RoundRobinDeterministic: return "round-robin-deterministic";
        case SchedulerMode::Concurrent: return "concurrent";
    }
    return "?";
}

RankScheduler::RankScheduler(int size, SchedulerMode mode, double timeout_seconds)
    : mode_(mode),
      size_(size),
      timeout_(timeout_seconds),
      state_(size, RankState::NotStarted),
      blocked_version_(size, 0) {}

void RankScheduler::throw_if_stopping(int rank) const {
    if (deadlock_ && state_[rank] != RankState::Done) {
        throw Error(ErrorCode::DeadlockTimeout, "no rank can make progress");
    }
    if (shutdown_) {
        throw Error(ErrorCode::Interrupted, "run is shutting down");
    }
}

void RankScheduler::attach(int rank) {
    std::unique_lock lk(mu_);
    state_[rank] = RankState::Ready;
    if (mode_ == SchedulerMode::RoundRobinDeterministic) {
        cv_.notify_all();
        cv_.wait(lk, [&] { return shutdown_ || deadlock_ || current_ == rank; });
        throw_if_stopping(rank);
    } else {
        throw_if_stopping(rank);
    }
    state_[rank] = RankState::Running;
}

void RankScheduler::detach(int rank) noexcept {
    std::unique_lock lk(mu_);
    state_[rank] = RankState::Done;
    if (mode_ == SchedulerMode::RoundRobinDeterministic && current_ == rank) {
        pass_baton(rank);
    }
    cv_.notify_all();
}

std::unique_lock<std::mutex> RankScheduler::acquire(int rank) {
    std::unique_lock lk(mu_);
    throw_if_stopping(rank);
    return lk;
}

void RankScheduler::wait(std::unique_lock<std::mutex>& lk, int rank,
                         const std::function<bool()>& pred) {
    if (mode_ == SchedulerMode::RoundRobinDeterministic) {
        for (;;) {
            throw_if_stopping(rank);
            if (pred()) {
                state_[rank] = RankState::Running;
                return;
            }
            state_[rank] = RankState::Blocked;
            blocked_version_[rank] = version_;
            pass_baton(rank);
            cv_.notify_all();
            cv_.wait(lk, [&] { return shutdown_ || deadlock_ || current_ == rank; });
        }
    }

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout_);
    for (;;) {
        throw_if_stopping(rank);
        if (pred()) return;
        if (!cv_.wait_until(lk, deadline, [&] { return shutdown_ || pred(); })) {
            throw Error(ErrorCode::DeadlockTimeout, "blocked past the deadlock timeout");
        }
    }
}

void RankScheduler::notify(std::unique_lock<std::mutex>&) {
    ++version_;
    cv_.notify_all();
}

void RankScheduler::request_shutdown() noexcept {
    std::unique_lock lk(mu_);
    shutdown_ = true;
    cv_.notify_all();
}

std::unique_lock<std::mutex> RankScheduler::lock_external() { return std::unique_lock(mu_); }

void RankScheduler::pass_baton(int from) {
    for (int step = 1; step <= size_; ++step) {
        const int c = (from + step) % size_;
        switch (state_[c]) {
            case RankState::NotStarted:
            case RankState::Ready:
                current_ = c;
                return;
            case RankState::Blocked:
                // Something changed since this rank blocked; let it recheck.
                if (blocked_version_[c] < version_) {
                    current_ = c;
                    return;
                }
                break;
            case RankState::Running:
                // Only reachable when `from` itself re-enters the candidate
                // scan; a second running rank cannot exist in this mode.
                break;
            case RankState::Done:
                break;
        }
    }

    bool all_done = true;
    for (const auto s : state_) {
        if (s != RankState::Done) {
            all_done = false;
            break;
        }
    }
    if (all_done) {
        current_ = -1;
        return;
    }
    // Every unfinished rank is blocked and has already rechecked at the
    // current version: nothing can wake anyone again.
    deadlock_ = true;
}

}  // namespace qmpi
