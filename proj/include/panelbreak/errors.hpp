#ifndef PANELBREAK_ERRORS_HPP
#define PANELBREAK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace panelbreak {

// Base class for all library errors. CLI maps subtypes to exit codes:
// ConfigError -> 1, DataError -> 2, everything else (numerical) -> 3.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class EmptyWindowError : public Error {
public:
  explicit EmptyWindowError(const std::string& msg) : Error(msg) {}
};

class NonFiniteError : public DataError {
public:
  explicit NonFiniteError(const std::string& msg) : DataError(msg) {}
};

class OutOfSupportError : public Error {
public:
  explicit OutOfSupportError(const std::string& msg) : Error(msg) {}
};

class DegenerateSegmentError : public Error {
public:
  explicit DegenerateSegmentError(const std::string& msg) : Error(msg) {}
};

class NoConvergenceError : public Error {
public:
  explicit NoConvergenceError(const std::string& msg) : Error(msg) {}
};

class ZeroSignalError : public Error {
public:
  explicit ZeroSignalError(const std::string& msg) : Error(msg) {}
};

class LagTooLargeError : public Error {
public:
  explicit LagTooLargeError(const std::string& msg) : Error(msg) {}
};

class KernelNotPDError : public Error {
public:
  explicit KernelNotPDError(const std::string& msg) : Error(msg) {}
};

class CovNotPSDError : public Error {
public:
  explicit CovNotPSDError(const std::string& msg) : Error(msg) {}
};

class HorizonOverflowError : public Error {
public:
  explicit HorizonOverflowError(const std::string& msg) : Error(msg) {}
};

class TailNotSummableError : public Error {
public:
  explicit TailNotSummableError(const std::string& msg) : Error(msg) {}
};

}  // namespace panelbreak

#endif
