// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/symbols.hpp"

#include <algorithm>
#include <iterator>

namespace abirift {

std::string SymbolId::to_string() const {
  return version ? name + "@" + *version : name;
}

bool is_exported(const RawSymbol &symbol) {
  return symbol.size > 0 &&
         symbol.section_index.kind != SectionIndex::Kind::Undefined &&
         symbol.sym_type != SymbolType::NoType &&
         symbol.binding != SymbolBinding::Local;
}

ExportSet exported(std::span<const RawSymbol> symbols) {
  ExportSet out;
  for (const auto &s : symbols) {
    if (!is_exported(s))
      continue;
    out.insert(ExportedSymbol{SymbolId{s.name, s.version}, s.size, s.sym_type});
  }
  return out;
}

SymbolsVerdict missing_previously_found_exports(const ExportSet &old_exports,
                                                const ExportSet &new_exports) {
  SymbolsVerdict verdict;
  std::set_difference(old_exports.begin(), old_exports.end(),
                      new_exports.begin(), new_exports.end(),
                      std::back_inserter(verdict.missing), ByIdentity{});
  verdict.compatible = verdict.missing.empty();
  return verdict;
}

} // namespace abirift
