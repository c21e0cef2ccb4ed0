#include "portsheaf/errors.hpp"

namespace portsheaf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::EmptyHom: return "EmptyHom";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::MisalignedOffset: return "MisalignedOffset";
    case ErrorKind::JunctionMismatch: return "JunctionMismatch";
    case ErrorKind::ShiftMismatch: return "ShiftMismatch";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NotAMember: return "NotAMember";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::StructureViolation: return "StructureViolation";
    case ErrorKind::NoninteractionViolation: return "NoninteractionViolation";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::MissingAuxTag: return "MissingAuxTag";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace portsheaf
