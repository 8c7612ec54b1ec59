// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// Statistics over splice records: predictor agreement, breakage frequency,
/// SONAME versus file-name changes, throughput, and per-group summaries.

#ifndef ABIRIFT_STATS_HPP
#define ABIRIFT_STATS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abirift/diff.hpp"
#include "abirift/splice.hpp"

namespace abirift {

/// Record filter. An absent field matches both values.
struct Stratum {
  std::optional<bool> filename_changed;
  std::optional<bool> soname_changed;

  bool contains(const SpliceRecord &record) const;
  /// e.g. "all", "filename_changed", "filename_unchanged+soname_changed".
  std::string label() const;

  friend bool operator==(const Stratum &, const Stratum &) = default;
};

struct AgreementTable {
  std::vector<std::string> predictors;
  Stratum stratum;
  /// 2^k cells; bit i of the index is set when predictor i said incompatible.
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;    ///< records counted in `counts`
  std::uint64_t excluded = 0; ///< in stratum but unknown, error or missing
  double agreement_fraction = 0.0;

  std::uint64_t count(std::span<const Verdict> verdicts) const;
};

/// Throws EmptyStratum when no record of the stratum carries a definite
/// verdict from every predictor, std::invalid_argument for fewer than two
/// predictors.
AgreementTable agreement(std::span<const SpliceRecord> records,
                         const std::vector<std::string> &predictors,
                         const Stratum &stratum = {});

/// Aligned-text rendering: a 2x2 grid for two predictors (rows follow the
/// first), one line per verdict combination otherwise.
std::string render_agreement(const AgreementTable &table);

struct FrequencyColumn {
  Stratum stratum;
  std::uint64_t incompatible = 0;
  /// Absent (undefined) when the stratum has no incompatible record.
  std::map<BreakageCategory, std::optional<double>> fractions;
};

struct FrequencyTable {
  std::string predictor;
  std::vector<FrequencyColumn> columns;
};

/// The default columns: filename x soname, then "all".
std::vector<Stratum> default_strata();

/// Throws EmptyStratum when no record in any stratum carries `predictor`.
FrequencyTable breakage_frequency(std::span<const SpliceRecord> records,
                                  const std::string &predictor = "corpus",
                                  const std::vector<Stratum> &strata =
                                      default_strata());

std::string render_frequency(const FrequencyTable &table);

/// Counts of records by filename_changed (rows) x soname_changed (columns).
struct SonameTable {
  std::uint64_t counts[2][2] = {{0, 0}, {0, 0}};
};

SonameTable soname_table(std::span<const SpliceRecord> records);
std::string render_soname(const SonameTable &table);

struct DistributionSummary {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;

  /// "mean^{max}_{min}" with one decimal.
  std::string render() const;
};

/// Throws std::invalid_argument for an empty input.
DistributionSummary summarize_groups(std::span<const double> values);

struct PredictorThroughput {
  std::uint64_t bytes = 0;
  std::uint64_t elapsed_ns = 0;
  std::uint64_t runs = 0;
  /// Runs whose elapsed time was zero and was replaced by 1 ns.
  std::uint64_t zero_elapsed_guarded = 0;
  double bytes_per_second = 0.0;
};

struct ThroughputTable {
  std::map<std::string, PredictorThroughput> predictors;
  /// ratio[a][b] = throughput(a) / throughput(b).
  std::map<std::string, std::map<std::string, double>> ratio;
};

ThroughputTable throughput(std::span<const SpliceRecord> records);
std::string render_throughput(const ThroughputTable &table);

} // namespace abirift

#endif
