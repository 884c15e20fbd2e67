#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace folner {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text or JSON.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

// Elements or sets from one group context fed into another.
class ContextMismatch : public Error {
 public:
  explicit ContextMismatch(const std::string& what) : Error(what) {}
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(what) {}
};

// Integer arithmetic left the representable range.
class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& what) : Error(what) {}
};

// A finite-depth approximation ran out of refinement room.
class DepthExhausted : public Error {
 public:
  explicit DepthExhausted(const std::string& what) : Error(what) {}
};

// An output failed its own verification contract.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(what) {}
};

// A named hypothesis of a combinatorial statement failed in strict mode.
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(std::string clause, const std::string& what)
      : Error(what), clause_(std::move(clause)) {}
  const std::string& clause() const { return clause_; }

 private:
  std::string clause_;
};

// How failed hypotheses of a combinatorial statement are handled:
// Strict throws HypothesisViolation, Audit records the failure in the
// report and keeps going.
enum class CheckMode { Strict, Audit };

// An internal structural claim of the castle recursion failed.
// Carries enough position data to replay the offending stage.
class CastleAssertion : public Error {
 public:
  CastleAssertion(std::int64_t stage, std::int64_t tower, std::string claim,
                  const std::string& detail)
      : Error("castle assertion [" + claim + "] at stage " +
              std::to_string(stage) + ", tower " + std::to_string(tower) +
              ": " + detail),
        stage_(stage),
        tower_(tower),
        claim_(std::move(claim)) {}
  std::int64_t stage() const { return stage_; }
  std::int64_t tower() const { return tower_; }
  const std::string& claim() const { return claim_; }

 private:
  std::int64_t stage_;
  std::int64_t tower_;
  std::string claim_;
};

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer add overflow");
  return r;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer sub overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer mul overflow");
  return r;
}

}  // namespace detail
}  // namespace folner
