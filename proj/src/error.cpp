#include "lamlab/error.hpp"

namespace lamlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::SingularB: return "SingularB";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::Index: return "IndexError";
    case ErrorCode::NotSupported: return "NotSupported";
    case ErrorCode::CertificateMismatch: return "CertificateMismatch";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::Shape: return "ShapeError";
    case ErrorCode::Io: return "IoError";
  }
  return "Error";
}

}  // namespace lamlab
