// SPDX-License-Identifier: Apache-2.0
#include "olaq/error.hpp"

namespace olaq {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::MaskMismatch: return "MaskMismatch";
    case ErrorKind::MissingCache: return "MissingCache";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::EmptyComponent: return "EmptyComponent";
    case ErrorKind::Data: return "DataError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Diverged: return "Diverged";
  }
  return "Error";
}

}  // namespace olaq
