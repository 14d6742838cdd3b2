#pragma once

#include <stdexcept>
#include <string>

namespace metafal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownCollection : public Error {
 public:
  explicit UnknownCollection(const std::string& name)
      : Error("unknown element collection '" + name + "'") {}
};

class ElementNotPresent : public Error {
 public:
  using Error::Error;
};

class CardinalityViolation : public Error {
 public:
  using Error::Error;
};

class InvalidMutation : public Error {
 public:
  using Error::Error;
};

class RejectionLimit : public Error {
 public:
  using Error::Error;
};

class IncompatibleEnvironments : public Error {
 public:
  IncompatibleEnvironments() : Error("environments differ in their parameters") {}
  using Error::Error;
};

class ControllerProtocolError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace metafal
