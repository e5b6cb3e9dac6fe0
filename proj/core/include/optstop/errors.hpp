#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace optstop {

/// Base class for all library errors. `module()` names the subsystem that
/// raised the error so batch drivers can report where a run failed.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Truncating a reward at or below its left edge would make it constant.
struct InvalidTruncation : Error {
    explicit InvalidTruncation(const std::string& m) : Error("reward", m) {}
};

/// A construction or transformation destroyed the upward mass of a law.
struct DegenerateLaw : Error {
    explicit DegenerateLaw(const std::string& m) : Error("stochastic", m) {}
};

/// The discounted first-passage functional cannot be resolved to tolerance;
/// the regime must be settled by the classifier first.
struct UnboundedExpectation : Error {
    explicit UnboundedExpectation(const std::string& m) : Error("stochastic", m) {}
};

/// Monte Carlo path truncation accounts for too much of the estimate.
struct TruncationDominates : Error {
    explicit TruncationDominates(const std::string& m) : Error("stochastic", m) {}
};

/// The level schedule ended before the iterates converged or diverged.
struct ScheduleTooShort : Error {
    explicit ScheduleTooShort(const std::string& m) : Error("solver", m) {}
};

/// A sequence that must be monotone moved the wrong way beyond tolerance.
struct MonotonicityViolated : Error {
    explicit MonotonicityViolated(const std::string& m) : Error("levy", m) {}
};

/// The DP grid does not bracket the stopping boundary.
struct GridTooNarrow : Error {
    explicit GridTooNarrow(const std::string& m) : Error("oracle", m) {}
};

/// The DP oracle declines instances where value iteration may not converge.
struct OracleRefusal : Error {
    explicit OracleRefusal(const std::string& m) : Error("oracle", m) {}
};

/// Monte Carlo noise exceeds the finite-difference signal.
struct NoiseDominates : Error {
    explicit NoiseDominates(const std::string& m) : Error("smoothfit", m) {}
};

/// A precondition of an operation does not hold for the given instance.
struct PreconditionViolation : Error {
    PreconditionViolation(const std::string& module, const std::string& m) : Error(module, m) {}
};

/// Input JSON does not match the problem schema.
struct SchemaError : Error {
    explicit SchemaError(const std::string& m) : Error("cli", m) {}
};

/// Instance outside the supported families.
struct Unsupported : Error {
    Unsupported(const std::string& module, const std::string& m) : Error(module, m) {}
};

} // namespace optstop
