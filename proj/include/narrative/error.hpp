#pragma once

#include <stdexcept>
#include <string>

namespace narrative {

// Every recoverable failure in the library surfaces as this type; the message
// names the offending input (row, id, term) so callers can report it as is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace narrative
