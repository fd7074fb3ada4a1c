#pragma once

#include <stdexcept>
#include <string>

namespace adhominem {

// Base class for every error raised by the library. The CLI maps these to
// exit code 2 (data/model error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (empty input, bad threshold...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A function evaluated to a non-finite value where a finite one is required.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class CorruptVocabularyError : public Error {
 public:
  using Error::Error;
};

// Pair sampling cannot satisfy a label quota.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace adhominem
