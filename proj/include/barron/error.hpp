#pragma once

#include <stdexcept>
#include <string>

namespace barron {

// Raised when an operation's preconditions are violated by its inputs.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace barron
