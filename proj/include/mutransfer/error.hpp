#pragma once

#include <stdexcept>
#include <string>

namespace mutransfer {

enum class ErrorKind {
  InvalidInput,
  Domain,
  Singularity,
  Assembly,
  Conditioning,
  NotFound,
  BlowUp,
  ChannelMismatch,
  Matching,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Assembly: return "assembly error";
    case ErrorKind::Conditioning: return "conditioning error";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::ChannelMismatch: return "channel mismatch";
    case ErrorKind::Matching: return "matching error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

}  // namespace mutransfer
