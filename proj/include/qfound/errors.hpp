#pragma once

#include <stdexcept>
#include <string>

namespace qfound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Observable not contained in the measurement context it was used with.
class IncompatibleObservable : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

class NonCommutingFamily : public Error {
 public:
  using Error::Error;
};

class UnknownContext : public Error {
 public:
  using Error::Error;
};

class MissingLayer : public Error {
 public:
  using Error::Error;
};

class NonPositiveFunctional : public Error {
 public:
  using Error::Error;
};

class MalformedRaySet : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

}  // namespace qfound
