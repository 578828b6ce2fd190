// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace domcl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed input record; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Violated operation precondition (empty batch, bad index, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Not enough documents to satisfy a request.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class CacheMissError : public Error {
 public:
  explicit CacheMissError(const std::string& id);
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Stored manifest disagrees with the requested configuration.
class ManifestMismatchError : public Error {
 public:
  using Error::Error;
};

class NonFiniteLossError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace domcl
