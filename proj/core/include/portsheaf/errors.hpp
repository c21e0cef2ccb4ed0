#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace portsheaf {

enum class ErrorKind {
  DomainMismatch,
  EmptyHom,
  OutOfRange,
  MisalignedOffset,
  JunctionMismatch,
  ShiftMismatch,
  GridMismatch,
  NotAMember,
  DimensionMismatch,
  BlowUp,
  StructureViolation,
  NoninteractionViolation,
  ConstraintViolation,
  MissingAuxTag,
  NotClosed,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace portsheaf
