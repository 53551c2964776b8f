#ifndef DPHMM_ERROR_HPP
#define DPHMM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dphmm {

// Invalid argument to a numerical routine (x <= 0 for ln_gamma, etc.).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A caller broke a documented precondition (non-canonical states, empty
// segment, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or model-incompatible input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite likelihoods, singular precision matrices.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dphmm

#endif  // DPHMM_ERROR_HPP
