// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace repgars {

/// Input that violates a documented contract: malformed files, bad
/// configuration, out-of-range labels. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-oriented parse failure. The message always names the line.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError(what + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Shape disagreement between tensors or between a tensor and a config.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace repgars
