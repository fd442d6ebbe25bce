// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace meshprior {

enum class ErrorCode {
  Io,
  Format,
  Data,
  Structure,
  Degenerate,
  Numeric,
  State,
  Config,
  Argument,
  Simplification,
  UndefinedLoss,
};

/// Exception carrying a coarse error category; the C API maps it onto a
/// status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace meshprior
