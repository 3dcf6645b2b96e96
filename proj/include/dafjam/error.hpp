#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace dafjam {

enum class ErrorKind {
  TemperatureOutOfRange,
  DistanceTooFar,
  InvalidConfig,
  SampleRateMismatch,
  GainOutOfRange,
  NoPeak,
  FileNotFound,
  UnsupportedFormat,
  CorruptHeader,
  IoError,
  Validation,
  SubscriberOverflow,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TemperatureOutOfRange: return "TemperatureOutOfRange";
    case ErrorKind::DistanceTooFar: return "DistanceTooFar";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorKind::GainOutOfRange: return "GainOutOfRange";
    case ErrorKind::NoPeak: return "NoPeak";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptHeader: return "CorruptHeader";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::SubscriberOverflow: return "SubscriberOverflow";
  }
  return "Unknown";
}

/// True for failures caused by the filesystem rather than by the request.
constexpr bool is_io_error(ErrorKind kind) {
  return kind == ErrorKind::FileNotFound || kind == ErrorKind::UnsupportedFormat ||
         kind == ErrorKind::CorruptHeader || kind == ErrorKind::IoError;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Rejected field of a control patch; maps to HTTP 422 {field, reason}.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, std::string reason)
      : Error(ErrorKind::Validation, field + ": " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

}  // namespace dafjam
