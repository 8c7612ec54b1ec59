// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#ifndef ABIRIFT_REPORT_JSON_HPP
#define ABIRIFT_REPORT_JSON_HPP

#include <cstdint>

#include <json.hpp>

#include "abirift/diff.hpp"

namespace abirift::detail {

nlohmann::json report_json(const DiffReport &report);

/// Reads a non-negative integer. Throws InvalidRecord for anything else,
/// including negative numbers that a plain get<> would wrap around.
std::uint64_t unsigned_field(const nlohmann::json &j);

/// Throws InvalidRecord when fields are missing or mistyped.
DiffReport report_from(const nlohmann::json &j);

} // namespace abirift::detail

#endif
