#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace retok {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class UnknownLabelError : public Error {
public:
    UnknownLabelError(const std::string& label, std::size_t position)
        : Error("unknown-label",
                "unknown label '" + label + "' at position " + std::to_string(position)),
          label_(label), position_(position) {}

    const std::string& label() const noexcept { return label_; }
    std::size_t position() const noexcept { return position_; }

private:
    std::string label_;
    std::size_t position_;
};

class DanglingReferenceError : public Error {
public:
    explicit DanglingReferenceError(std::uint64_t missing)
        : Error("dangling-reference", "reference to missing token id " + std::to_string(missing)),
          missing_(missing) {}

    std::uint64_t missing_id() const noexcept { return missing_; }

private:
    std::uint64_t missing_;
};

/// Data errors: malformed documents, inputs violating a precondition.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace retok
