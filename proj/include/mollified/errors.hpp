#pragma once

#include <stdexcept>
#include <string>

namespace mollified {

// Base for every error raised by the library. The C API maps each subclass
// to a distinct status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Collinear hull input, duplicate seeds and similar geometric degeneracies.
class DegenerateGeometry : public Error {
public:
  using Error::Error;
};

class SingularSystem : public Error {
public:
  using Error::Error;
};

// Mollifier boxes centred inside the domain are not fully covered by cells.
class CoverageError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace mollified
