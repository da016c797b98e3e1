#pragma once

#include <stdexcept>
#include <string>

namespace liarlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndexError : Error {
  using Error::Error;
};
struct CapacityError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct ModelError : Error {
  using Error::Error;
};
struct CompletionError : Error {
  using Error::Error;
};
struct CalibrationError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace liarlab
