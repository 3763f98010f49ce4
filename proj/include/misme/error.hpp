#pragma once

#include <stdexcept>
#include <string>

namespace misme {

// Everything thrown by the library derives from Error; the subclasses say
// which contract failed so callers (and the CLI exit-code mapping) can
// distinguish bad inputs from internal failures.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public Error { public: using Error::Error; };  // tensor/shape mismatch
class ConfigError    : public Error { public: using Error::Error; };  // invalid configuration value
class ContractError  : public Error { public: using Error::Error; };  // API precondition violated
class ParseError     : public Error { public: using Error::Error; };  // malformed file content
class SchemaError    : public Error { public: using Error::Error; };  // missing/unknown column or key
class BoundsError    : public Error { public: using Error::Error; };  // geometry outside an image
class StatError      : public Error { public: using Error::Error; };  // undefined statistic
class IoError        : public Error { public: using Error::Error; };  // filesystem/stream failure
class DivergenceError: public Error { public: using Error::Error; };  // non-finite loss while training

}  // namespace misme
