#pragma once

#include <stdexcept>
#include <string>

namespace bindlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A role vocabulary cannot supply the requested number of distinct entities.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Counterfactual construction is impossible for the requested indices.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// The pair generator and the mechanism semantics disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bindlab
