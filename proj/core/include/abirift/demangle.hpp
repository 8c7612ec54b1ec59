// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// A deliberately small Itanium C++ demangler. It understands plain and
/// nested function names with builtin, class, pointer, reference and const
/// parameter types. Anything else (substitutions, templates, special names,
/// vendor suffixes) comes back as Unparsed and callers use the raw string.

#ifndef ABIRIFT_DEMANGLE_HPP
#define ABIRIFT_DEMANGLE_HPP

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace abirift {

struct DemangledName {
  std::vector<std::string> qualified_name;  ///< scope components, outermost first
  std::vector<std::string> parameter_types; ///< empty for f(void)
  bool const_method = false;
  std::string raw;

  /// "A::B::f(int, double)", with a trailing " const" for const methods.
  std::string render() const;

  friend bool operator==(const DemangledName &, const DemangledName &) = default;
};

struct Unparsed {
  std::string raw;

  friend bool operator==(const Unparsed &, const Unparsed &) = default;
};

using DemangleResult = std::variant<DemangledName, Unparsed>;

DemangleResult demangle(std::string_view raw);

/// Qualified name without the parameter list: "A::B::f".
std::string base_name(const DemangledName &name);

/// The demangled rendering when parsing succeeds, the raw string otherwise.
std::string display_name(std::string_view raw);

const std::string &raw_of(const DemangleResult &result);

} // namespace abirift

#endif
