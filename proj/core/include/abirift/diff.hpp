// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// Comparison of two corpora, older first, into a closed taxonomy of
/// breakages and an overall verdict.

#ifndef ABIRIFT_DIFF_HPP
#define ABIRIFT_DIFF_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abirift/corpus.hpp"

namespace abirift {

enum class BreakageCategory {
  FunctionRemoved,
  FunctionAdded,
  FunctionParamChanged,
  FunctionSubtypeChanged,
  FunctionReturnTypeChanged,
  VtableEntryAdded,
  VtableEntryRemoved,
  EnumeratorAdded,
  EnumeratorRemoved,
  EnumeratorValueChanged,
  GlobalVariableRemoved,
  GlobalVariableTypeChanged,
  GlobalLinkageChanged,
  SonameChanged,
  SymbolRemoved,
};

inline constexpr BreakageCategory all_breakage_categories[] = {
    BreakageCategory::FunctionRemoved,
    BreakageCategory::FunctionAdded,
    BreakageCategory::FunctionParamChanged,
    BreakageCategory::FunctionSubtypeChanged,
    BreakageCategory::FunctionReturnTypeChanged,
    BreakageCategory::VtableEntryAdded,
    BreakageCategory::VtableEntryRemoved,
    BreakageCategory::EnumeratorAdded,
    BreakageCategory::EnumeratorRemoved,
    BreakageCategory::EnumeratorValueChanged,
    BreakageCategory::GlobalVariableRemoved,
    BreakageCategory::GlobalVariableTypeChanged,
    BreakageCategory::GlobalLinkageChanged,
    BreakageCategory::SonameChanged,
    BreakageCategory::SymbolRemoved,
};

std::string_view to_string(BreakageCategory category);
std::optional<BreakageCategory> parse_category(std::string_view text);

enum class Severity { Breaking, Informational };

struct Breakage {
  BreakageCategory category = BreakageCategory::SymbolRemoved;
  std::string subject;
  std::string before;
  std::string after;
  Severity severity = Severity::Breaking;

  friend bool operator==(const Breakage &, const Breakage &) = default;
};

enum class Verdict { Compatible, Incompatible, Unknown };
enum class DiffMode { FullDwarf, SymbolsOnly };

std::string_view to_string(Verdict verdict);
std::string_view to_string(DiffMode mode);
std::optional<Verdict> parse_verdict(std::string_view text);

struct DiffReport {
  Verdict verdict = Verdict::Compatible;
  std::vector<Breakage> breakages; ///< sorted by (category, subject), unique
  std::string predictor = "corpus";
  std::uint64_t elapsed_ns = 0; ///< filled by callers that time the diff
  DiffMode mode = DiffMode::FullDwarf;

  friend bool operator==(const DiffReport &, const DiffReport &) = default;
};

struct DiffOptions {
  /// Compare exports only even when both sides carry DWARF.
  bool symbols_only = false;
  /// When false, EnumeratorAdded is reported as informational.
  bool enumerator_added_breaking = true;
};

DiffReport diff_corpora(const AbiCorpus &old_corpus, const AbiCorpus &new_corpus,
                        const DiffOptions &options = {});

std::vector<Breakage> diff_functions(const AbiCorpus &old_corpus,
                                     const AbiCorpus &new_corpus);
std::vector<Breakage> diff_vtables(const AbiCorpus &old_corpus,
                                   const AbiCorpus &new_corpus);
std::vector<Breakage> diff_enums(const AbiCorpus &old_corpus,
                                 const AbiCorpus &new_corpus,
                                 const DiffOptions &options = {});
std::vector<Breakage> diff_globals(const AbiCorpus &old_corpus,
                                   const AbiCorpus &new_corpus);
std::vector<Breakage> diff_soname(const AbiCorpus &old_corpus,
                                  const AbiCorpus &new_corpus);
/// One SymbolRemoved per export of the older corpus missing from the newer.
std::vector<Breakage> diff_exports(const AbiCorpus &old_corpus,
                                   const AbiCorpus &new_corpus);

/// JSON document with "report_version": 1. `indent` < 0 gives one line.
std::string report_to_json(const DiffReport &report, int indent = 2);
/// Throws InvalidRecord on malformed input.
DiffReport report_from_json(std::string_view text);

/// Human-readable multi-line rendering.
std::string render_report(const DiffReport &report);

} // namespace abirift

#endif
