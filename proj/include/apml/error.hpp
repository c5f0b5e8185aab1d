#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class NonFiniteInput : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The adaptive temperature would be <= 0 (p_min <= 1/K).
class NonPositiveTemperature : public Error {
public:
  using Error::Error;
};

/// A row or column of a transport matrix has no positive entry.
class DegenerateMarginal : public Error {
public:
  using Error::Error;
};

class BatchMismatch : public Error {
public:
  using Error::Error;
};

/// Input exceeds what the brute-force oracle can enumerate.
class OracleLimit : public Error {
public:
  using Error::Error;
};

class IOError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Loss or gradient became non-finite during descent.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string &what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

} // namespace apml
