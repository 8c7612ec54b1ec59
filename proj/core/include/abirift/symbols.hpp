// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// The exported-symbols predictor: filter each binary's symbol tables down
/// to its exports and report the exports of the older binary that the newer
/// one no longer provides.

#ifndef ABIRIFT_SYMBOLS_HPP
#define ABIRIFT_SYMBOLS_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "abirift/elf_reader.hpp"

namespace abirift {

/// Identity used for set membership: (name, version).
struct SymbolId {
  std::string name;
  std::optional<std::string> version;

  friend auto operator<=>(const SymbolId &, const SymbolId &) = default;
  friend bool operator==(const SymbolId &, const SymbolId &) = default;

  /// "name" or "name@version".
  std::string to_string() const;
};

struct ExportedSymbol {
  SymbolId id;
  std::uint64_t size = 0; ///< always > 0
  SymbolType sym_type = SymbolType::Func;

  friend bool operator==(const ExportedSymbol &, const ExportedSymbol &) = default;
};

/// Orders exports by identity only; size and type ride along.
struct ByIdentity {
  using is_transparent = void;
  bool operator()(const ExportedSymbol &a, const ExportedSymbol &b) const {
    return a.id < b.id;
  }
  bool operator()(const ExportedSymbol &a, const SymbolId &b) const {
    return a.id < b;
  }
  bool operator()(const SymbolId &a, const ExportedSymbol &b) const {
    return a < b.id;
  }
};

using ExportSet = std::set<ExportedSymbol, ByIdentity>;

struct SymbolsVerdict {
  std::vector<ExportedSymbol> missing; ///< sorted by identity
  bool compatible = true;
};

/// True when the raw symbol passes the export filter: positive size, defined,
/// typed, and not local.
bool is_exported(const RawSymbol &symbol);

/// The export set of one binary. When two raw entries share an identity the
/// first one in input order wins.
ExportSet exported(std::span<const RawSymbol> symbols);

/// {exported old} \ {exported new}. `old_exports` must come from the older
/// library; additions in `new_exports` never affect the verdict.
SymbolsVerdict missing_previously_found_exports(const ExportSet &old_exports,
                                                const ExportSet &new_exports);

} // namespace abirift

#endif
