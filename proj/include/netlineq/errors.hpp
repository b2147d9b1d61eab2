#pragma once

#include <stdexcept>
#include <string>

namespace netlineq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Graph is not strongly connected where an algorithm requires it.
class ConnectivityError : public Error {
 public:
  using Error::Error;
};

// Graph is not weight-balanced where an algorithm requires it.
class BalanceError : public Error {
 public:
  using Error::Error;
};

// The global system A x = b is inconsistent.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

// Eigenvalue extraction failed (zero matrix, PSD/symmetry violation, ...).
class SpectralError : public Error {
 public:
  using Error::Error;
};

// A trajectory left the finite range; stepsize or gain misconfiguration.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Config file parse or schema violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace netlineq
