// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_ERROR_HPP
#define PCMC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcmc {

enum class ErrorCode {
    OutOfRange,
    EmptyInput,
    MalformedStream,
    GridMismatch,
    DimensionMismatch,
    Capacity,
    InvalidArgument,
    Truncated,
    HeaderCorrupt,
    VersionMismatch,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfRange: return "out-of-range";
        case ErrorCode::EmptyInput: return "empty-input";
        case ErrorCode::MalformedStream: return "malformed-stream";
        case ErrorCode::GridMismatch: return "grid-mismatch";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::Capacity: return "capacity";
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::Truncated: return "truncated";
        case ErrorCode::HeaderCorrupt: return "header-corrupt";
        case ErrorCode::VersionMismatch: return "version-mismatch";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

// All library failures are reported through this type; `code()` lets callers
// branch without parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Stream decoding failure that carries the offending position (byte offset,
// bit position, or block index depending on the layer that raised it).
class StreamError : public Error {
public:
    StreamError(ErrorCode code, const std::string& what, std::size_t position)
        : Error(code, what + " (at " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace pcmc

#endif  // PCMC_ERROR_HPP
