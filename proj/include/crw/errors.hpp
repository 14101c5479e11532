#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crw {

enum class ErrorCode {
  kDomain,
  kBandEdge,
  kVelocityUndefined,
  kIncidentClosed,
  kPoleAtMechanicalResonance,
  kSingularNodeMatrix,
  kSingularBoundarySystem,
  kKOutOfDesignRange,
  kDegeneratePhase,
  kNegativeRadicand,
  kInvalidDesignPoint,
  kPacketNotCleared,
  kNormDrift,
  kUnsupportedScenario,
  kInvalidSpec,
  kUnknownFigure,
  kConfig,
};

// Short machine-readable tag, used as the sweep skip reason and in CLI messages.
std::string_view reason_code(ErrorCode code);

// Physics-domain failures map to CLI exit code 3; everything else is an input error.
bool is_physics_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace crw
