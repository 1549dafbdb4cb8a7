#pragma once

#include <stdexcept>
#include <string>

namespace beliefmarket {

/// Base class for every error thrown by the engine.
class MarketError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A call violated its contract (mismatched lengths, bad index, missing precondition).
class ContractError : public MarketError {
  public:
    using MarketError::MarketError;
};

/// A value lies outside the mathematical domain of an operation
/// (zero price under a log, all-zero belief table, degenerate conditional).
class DomainError : public MarketError {
  public:
    using MarketError::MarketError;
};

/// The computation was refused because it would exceed a configured size cap.
class CapacityError : public MarketError {
  public:
    using MarketError::MarketError;
};

/// A scenario file could not be parsed.
class ParseError : public MarketError {
  public:
    using MarketError::MarketError;
};

/// A scenario parsed but violates a structural invariant.
class ValidationError : public MarketError {
  public:
    using MarketError::MarketError;
};

} // namespace beliefmarket
