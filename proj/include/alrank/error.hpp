#pragma once

#include <stdexcept>
#include <string>

namespace alrank {

/// Raised for contract violations on engine inputs (bad ids, schema errors,
/// infeasible requests). The message is meant for the end user.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace alrank
