// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ctsdr {

enum class ErrorCode {
  InvalidArgument = 1,
  ContractViolation,
  UnknownScenario,
  MalformedConfig,
  Io,
  RunFault,
  Unreachable,
  NoTunnel,
  Split,
  Infeasible,
  Budget,
};

const char* to_string(ErrorCode code) noexcept;

// Base exception of the core library. The C API maps `code()` onto status
// values; everything else only needs `what()`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ctsdr
