#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bmc {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// Malformed file content; `offset` is the byte position where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& message, std::size_t offset)
        : Error("format", message + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Input whose statistics make an algorithm undefined (empty histogram
/// strata, single-valued data, zero perimeter...).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& message) : Error("degenerate", message) {}
};

class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& message) : Error("training", message) {}
};

class VersionError : public Error {
public:
    explicit VersionError(const std::string& message) : Error("version", message) {}
};

class SpecError : public Error {
public:
    explicit SpecError(const std::string& message) : Error("spec", message) {}
};

}  // namespace bmc
