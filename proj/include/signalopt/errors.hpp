#pragma once

#include <stdexcept>
#include <string>

namespace signalopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid input data: documents, plans, chromosomes.
class InputError : public Error {
 public:
  using Error::Error;
};

// A required prior result or configuration is missing (e.g. scenario 2
// without a scenario-1 plan).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace signalopt
