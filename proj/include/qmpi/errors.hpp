#pragma once

#include <stdexcept>
#include <string>

namespace qmpi {

// Every failure mode in the library carries one of these codes so tests and
// callers can match on the condition instead of parsing message text.
enum class ErrorCode {
    // state engine
    CapacityExceeded,
    DeadHandle,
    SameQubitCnot,
    StillEntangled,
    NotSeparable,
    TooFewOwners,
    DuplicateOwner,
    BadAmplitudes,

    // network fabric
    NotConnected,
    UnknownNode,
    TagMismatch,
    DeadlockTimeout,
    LocalityViolation,
    BadConfig,

    // communicator
    DuplicateInit,
    SizeMismatch,

    // point-to-point
    NotOwner,
    SelfSend,

    // collectives
    WrongCount,
    NestedExpose,
    StaleContext,
    ShareTampered,

    // runtime
    DuplicateName,
    UnknownProgram,
    RankPanic,
    GlobalDeadlock,
    Interrupted,
    BadLaunchSpec,

    // assembly subset
    UnknownOpcode,
    BadArity,
    BadOperand,
    UnallocatedQubit,
    DoubleFree,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Error(ErrorCode code, const std::string& message, int line)
        : std::runtime_error(std::string(to_string(code)) + ": " + message + " (line " +
                             std::to_string(line) + ")"),
          code_(code),
          line_(line) {}

    ErrorCode code() const { return code_; }

    // Source line for assembly parse/execute errors, -1 elsewhere.
    int line() const { return line_; }

  private:
    ErrorCode code_;
    int line_ = -1;
};

}  // namespace qmpi
