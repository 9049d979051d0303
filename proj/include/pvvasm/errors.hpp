#pragma once

#include <stdexcept>
#include <string>

namespace pvvasm {

// Base of every error raised by the library. The CLI maps subclasses to
// exit codes, so new error kinds must derive from one of the leaves below.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid job, budget or transform configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed numeric input such as NaN scores.
class InputError : public Error {
public:
    using Error::Error;
};

// Sample whose mean is too close to zero for a coefficient of variation.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

// Unsupported or corrupt audio file.
class FormatError : public Error {
public:
    using Error::Error;
};

// Noise/RIR asset problems (missing files, oversize impulse responses).
class AssetError : public Error {
public:
    using Error::Error;
};

// Scorer or bridge failure (CLI exit code 3). Carries the raw record that
// triggered it when one exists.
class ScorerError : public Error {
public:
    explicit ScorerError(const std::string& what, std::string payload = {})
        : Error(what), payload_(std::move(payload)) {}

    const std::string& payload() const noexcept { return payload_; }

private:
    std::string payload_;
};

}  // namespace pvvasm
