// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// The single exception type thrown by the abirift library.

#ifndef ABIRIFT_ERROR_HPP
#define ABIRIFT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace abirift {

enum class ErrorCode {
  NotElf,
  TruncatedFile,
  UnsupportedLayout,
  MissingSymbolTables,
  InputKindError,
  IoError,
  DebugInfoMismatch,
  MalformedDwarf,
  DanglingTypeRef,
  EmptyStratum,
  InvalidRecord,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace abirift

#endif
