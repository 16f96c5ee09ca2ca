// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pyric {

/// Base class for all pyric errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / serialization failure.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// A numeric operation left its valid domain (non-finite forward value,
/// invalid input field, out-of-range argument).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Dataset cannot support the requested computation (e.g. no observed
/// fires, so hit rate and EDI are undefined).
class DegenerateDataError : public Error {
public:
  explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
};

/// Two gridded objects that must share a grid/time axis do not.
class MismatchError : public Error {
public:
  explicit MismatchError(const std::string& msg) : Error(msg) {}
};

} // namespace pyric
