#pragma once

#include <stdexcept>
#include <string>

namespace siwsim {

// Bad user input: config values, CLI arguments, design parameters out of
// range. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A named physical design rule failed. Carries the rule identifier so
// callers can report which limit was hit and what value would satisfy it.
class ConstraintViolation : public ValidationError {
 public:
  ConstraintViolation(std::string rule, const std::string& message)
      : ValidationError(message), rule_(std::move(rule)) {}
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

// Failure while executing an otherwise valid request (I/O, internal
// inconsistency). The CLI maps this to exit code 3.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace siwsim
