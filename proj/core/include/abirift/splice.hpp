// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// The splice harness: runs every predictor over every matched library pair
/// of two trees and records verdicts, timings and sizes as JSON lines.

#ifndef ABIRIFT_SPLICE_HPP
#define ABIRIFT_SPLICE_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abirift/diff.hpp"
#include "abirift/matcher.hpp"

namespace abirift {

/// Debug search roots for the two sides of one pair.
struct PredictorContext {
  std::vector<std::filesystem::path> old_debug_roots;
  std::vector<std::filesystem::path> new_debug_roots;
};

/// A predictor turns a pair into a report. It may throw; the harness records
/// the failure instead of aborting the run.
using PredictorFn =
    std::function<DiffReport(const MatchedPair &, const PredictorContext &)>;

/// The exported-symbols predictor.
DiffReport predict_symbols(const std::filesystem::path &old_lib,
                           const std::filesystem::path &new_lib);

/// The corpus predictor (DWARF diff with symbols-only fallback).
DiffReport predict_corpus(const std::filesystem::path &old_lib,
                          const std::filesystem::path &new_lib,
                          const PredictorContext &context);

/// "symbols" and "corpus".
std::map<std::string, PredictorFn> builtin_predictors();

struct Prediction {
  std::optional<Verdict> verdict; ///< absent when the predictor failed
  std::uint64_t elapsed_ns = 0;
  std::map<std::string, std::uint64_t> breakage_summary; ///< category -> count
  std::optional<DiffReport> report;
  std::optional<std::string> message; ///< failure reason

  friend bool operator==(const Prediction &, const Prediction &) = default;
};

struct SpliceRecord {
  MatchedPair pair;
  bool soname_changed = false;
  std::optional<std::string> old_soname;
  std::optional<std::string> new_soname;
  std::map<std::string, Prediction> predictions;

  friend bool operator==(const SpliceRecord &, const SpliceRecord &) = default;
};

struct SpliceOptions {
  std::vector<std::string> predictors{"corpus", "symbols"};
  unsigned jobs = 1;
  /// Extra debug roots searched for both sides, ahead of <root>/usr/lib/debug.
  std::vector<std::filesystem::path> debug_dirs;
  /// Predictors available in addition to the builtin ones, by name.
  std::map<std::string, PredictorFn> extra_predictors;
};

struct SpliceRun {
  std::filesystem::path old_root;
  std::filesystem::path new_root;
  std::vector<std::string> predictors;
  std::string timestamp; ///< UTC, ISO 8601
  MatchResult match;
  std::vector<SpliceRecord> records; ///< one per matched pair, in pair order
};

/// Throws IoError for unreadable roots and std::invalid_argument for unknown
/// predictor names.
SpliceRun splice(const std::filesystem::path &old_root,
                 const std::filesystem::path &new_root,
                 const SpliceOptions &options = {});

/// One JSON line (no trailing newline) with "record_version": 1.
std::string record_to_json(const SpliceRecord &record);
/// Throws InvalidRecord.
SpliceRecord parse_record(std::string_view line);

std::string manifest_to_json(const SpliceRun &run);

/// Writes records.jsonl and manifest.json under `out_dir`.
void write_splice_output(const SpliceRun &run,
                         const std::filesystem::path &out_dir);

/// Reads a records.jsonl file. Blank lines are skipped.
std::vector<SpliceRecord> read_records(const std::filesystem::path &path);

std::string_view library_version();

} // namespace abirift

#endif
