#pragma once

#include <stdexcept>
#include <string>

namespace seq2rdf {

// Raised for contract violations (shape mismatch, partition errors, bad input
// files). The message is meant to be shown to a user as-is.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a file cannot be opened or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace seq2rdf
