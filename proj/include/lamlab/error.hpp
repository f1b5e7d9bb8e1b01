#pragma once

#include <stdexcept>
#include <string>

namespace lamlab {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  Domain,
  SingularB,
  NotSquare,
  Index,
  NotSupported,
  CertificateMismatch,
  UnknownId,
  ZeroField,
  Shape,
  Io,
};

const char* to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above; the C
// API maps them one-to-one onto lam_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lamlab
