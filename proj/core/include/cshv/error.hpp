#ifndef CSHV_ERROR_HPP
#define CSHV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cshv {

/// Failure categories raised by the library. Each maps to one of the
/// named error conditions of the operation contracts.
enum class ErrorKind {
  InvalidArgument,
  DegenerateMass,
  DegenerateDenominator,
  Infeasible,
  NoFeasibleStart,
  NewtonDiverged,
  WrongBranch,
  RadiusTooLarge,
  DistinctnessFailed,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateMass: return "DegenerateMass";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NoFeasibleStart: return "NoFeasibleStart";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::WrongBranch: return "WrongBranch";
    case ErrorKind::RadiusTooLarge: return "RadiusTooLarge";
    case ErrorKind::DistinctnessFailed: return "DistinctnessFailed";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace cshv

#endif  // CSHV_ERROR_HPP
