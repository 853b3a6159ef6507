#pragma once

#include <stdexcept>
#include <string>

namespace sctqm {

// Malformed or inconsistent input data (XYZ files, profiles, caches).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, int line)
      : DataError(what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Invalid run configuration or call parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sctqm
