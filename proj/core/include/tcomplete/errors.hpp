#pragma once

#include <stdexcept>
#include <string>

namespace tcomplete {

// Raised when a dense factorization or eigensolver does not converge.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tcomplete
