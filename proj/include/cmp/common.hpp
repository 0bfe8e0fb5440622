#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmp {

// Bound on natural-parameter magnitudes enforced by trainer updates.
// Rates beyond exp(30) are non-physical and destroy gradients; the core
// density/transition ops do not clamp.
inline constexpr double kNaturalClamp = 30.0;

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string &what)
        : std::runtime_error(what)
        , code_(std::move(code))
    {
    }

    // short machine-parsable class, e.g. "invalid-parameter"
    const std::string &code() const noexcept { return code_; }

private:
    std::string code_;
};

struct InvalidParameterError : Error {
    explicit InvalidParameterError(const std::string &w)
        : Error("invalid-parameter", w)
    {
    }
};

struct OutOfDomainError : Error {
    explicit OutOfDomainError(const std::string &w)
        : Error("out-of-domain", w)
    {
    }
};

struct IndexError : Error {
    explicit IndexError(const std::string &w)
        : Error("index", w)
    {
    }
};

struct DegenerateComponentError : Error {
    explicit DegenerateComponentError(const std::string &w)
        : Error("degenerate-component", w)
    {
    }
};

// a single restart hit a non-finite gradient and was abandoned
struct FitAbortError : Error {
    explicit FitAbortError(const std::string &w)
        : Error("fit-abort", w)
    {
    }
};

struct FitFailureError : Error {
    explicit FitFailureError(const std::string &w)
        : Error("fit-failure", w)
    {
    }
};

struct IoError : Error {
    explicit IoError(const std::string &w)
        : Error("io", w)
    {
    }
};

struct ConfigError : Error {
    explicit ConfigError(const std::string &w)
        : Error("config", w)
    {
    }
};

using WarningHandler = std::function<void(const std::string &)>;

// Records a non-fatal condition (clamped parameter, zero-variance neuron, ...).
// Default handler writes "warning: ..." to stderr. Thread-safe.
void warn(const std::string &message);

// Replaces the process-wide handler, returning the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

// Collects warnings for the lifetime of the object (restores the previous
// handler on destruction). Used by tests and by ops whose contract is
// "emitted with a warning record".
class WarningCapture {
public:
    WarningCapture();
    ~WarningCapture();
    WarningCapture(const WarningCapture &) = delete;
    WarningCapture &operator=(const WarningCapture &) = delete;

    std::vector<std::string> messages() const;

private:
    struct State;
    std::shared_ptr<State> state_;
    WarningHandler previous_;
};

} // namespace cmp
