#pragma once

#include <stdexcept>
#include <string>

namespace forge {

/// Base for all domain errors. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line or configuration usage. The CLI maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace forge
