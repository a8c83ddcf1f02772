// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace olaq {

enum class ErrorKind {
  InvalidInput,
  Config,
  Shape,
  MaskMismatch,
  MissingCache,
  DegenerateVariance,
  EmptyComponent,
  Data,
  Format,
  Io,
  Diverged,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every exception the library throws. `kind()` lets callers (the
/// CLI in particular) classify a failure without a cascade of catch blocks.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures caused by bad user input (CLI exit code 2).
  bool is_validation() const noexcept {
    switch (kind_) {
      case ErrorKind::InvalidInput:
      case ErrorKind::Config:
      case ErrorKind::Shape:
      case ErrorKind::Data:
      case ErrorKind::Format:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

#define OLAQ_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

OLAQ_DEFINE_ERROR(InvalidInput, InvalidInput)
OLAQ_DEFINE_ERROR(ConfigError, Config)
OLAQ_DEFINE_ERROR(ShapeError, Shape)
OLAQ_DEFINE_ERROR(MaskMismatch, MaskMismatch)
OLAQ_DEFINE_ERROR(MissingCache, MissingCache)
OLAQ_DEFINE_ERROR(DegenerateVariance, DegenerateVariance)
OLAQ_DEFINE_ERROR(EmptyComponent, EmptyComponent)
OLAQ_DEFINE_ERROR(DataError, Data)
OLAQ_DEFINE_ERROR(FormatError, Format)
OLAQ_DEFINE_ERROR(IoError, Io)
OLAQ_DEFINE_ERROR(Diverged, Diverged)

#undef OLAQ_DEFINE_ERROR

}  // namespace olaq
