#pragma once

#include <stdexcept>
#include <string>

namespace rulex {

// Error taxonomy mirrors the CLI exit codes:
//   parse/io  -> 3, divergence -> 4, validation/arity -> 5
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class divergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rulex
