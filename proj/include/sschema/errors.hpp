#pragma once

#include <stdexcept>
#include <string>

namespace sschema {

// Base type for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct DecodeError : Error { using Error::Error; };
struct SequenceError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
struct SerializationError : Error { using Error::Error; };

// External backends (OCR child process, MLLM endpoint).
struct BackendError : Error { using Error::Error; };
struct TransportError : Error { using Error::Error; };
struct ProtocolError : Error { using Error::Error; };
struct TimeoutError : Error { using Error::Error; };
struct ScriptingError : Error { using Error::Error; };

}  // namespace sschema
