// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace prosg {

/// Base of every error thrown by the library. The category drives the CLI exit
/// code and the HTTP status chosen by the render service.
class Error : public std::runtime_error {
 public:
  enum class Category { Argument, Data, Numeric };

  Error(Category category, const std::string& what) : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Tensor shapes that do not compose.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(Category::Numeric, what) {}
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(Category::Numeric, what) {}
};

/// Non-finite values showed up where finite ones are required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::Numeric, what) {}
};

/// Malformed user input (tracks, crops, configuration values).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(Category::Data, what) {}
};

/// Structurally valid input that violates a domain rule (non-orthonormal rotation, bad box).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(Category::Data, what) {}
};

/// A decoder key that does not resolve in the field registry.
class UnresolvedKeyError : public ValidationError {
 public:
  explicit UnresolvedKeyError(const std::string& what) : ValidationError(what) {}
};

/// Unknown node id, missing pose at a frame, missing tensor name.
class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(Category::Data, what) {}
};

/// A frame or camera that no local graph covers.
class CoverageError : public Error {
 public:
  explicit CoverageError(const std::string& what) : Error(Category::Data, what) {}
};

/// File system and file format problems, always carrying the offending path.
class LoadError : public Error {
 public:
  explicit LoadError(const std::string& what) : Error(Category::Data, what) {}
};

/// Bad configuration keys or values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::Argument, what) {}
};

/// Process exit code for an error category: 1 arguments, 2 data, 3 numerics.
int exit_code_for(const Error& error) noexcept;

}  // namespace prosg
