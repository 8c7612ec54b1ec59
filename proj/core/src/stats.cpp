// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "abirift/error.hpp"

namespace abirift {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string &s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string &s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

/// The definite verdict of `predictor`, or nothing when it is missing,
/// failed or unknown.
std::optional<bool> incompatible(const SpliceRecord &record,
                                 const std::string &predictor) {
  auto it = record.predictions.find(predictor);
  if (it == record.predictions.end() || !it->second.verdict)
    return std::nullopt;
  switch (*it->second.verdict) {
  case Verdict::Compatible:
    return false;
  case Verdict::Incompatible:
    return true;
  case Verdict::Unknown:
    break;
  }
  return std::nullopt;
}

} // namespace

bool Stratum::contains(const SpliceRecord &record) const {
  return (!filename_changed || *filename_changed == record.pair.filename_changed) &&
         (!soname_changed || *soname_changed == record.soname_changed);
}

std::string Stratum::label() const {
  std::string out;
  if (filename_changed)
    out = *filename_changed ? "filename_changed" : "filename_unchanged";
  if (soname_changed) {
    if (!out.empty())
      out += "+";
    out += *soname_changed ? "soname_changed" : "soname_unchanged";
  }
  return out.empty() ? "all" : out;
}

std::uint64_t AgreementTable::count(std::span<const Verdict> verdicts) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i)
    if (verdicts[i] == Verdict::Incompatible)
      index |= std::size_t{1} << i;
  return index < counts.size() ? counts[index] : 0;
}

AgreementTable agreement(std::span<const SpliceRecord> records,
                         const std::vector<std::string> &predictors,
                         const Stratum &stratum) {
  if (predictors.size() < 2)
    throw std::invalid_argument("agreement needs at least two predictors");
  if (predictors.size() > 16)
    throw std::invalid_argument("too many predictors");
  AgreementTable table;
  table.predictors = predictors;
  table.stratum = stratum;
  table.counts.assign(std::size_t{1} << predictors.size(), 0);
  for (const SpliceRecord &record : records) {
    if (!stratum.contains(record))
      continue;
    std::size_t index = 0;
    bool definite = true;
    for (std::size_t i = 0; i < predictors.size() && definite; ++i) {
      auto v = incompatible(record, predictors[i]);
      if (!v)
        definite = false;
      else if (*v)
        index |= std::size_t{1} << i;
    }
    if (!definite) {
      ++table.excluded;
      continue;
    }
    ++table.counts[index];
    ++table.total;
  }
  if (table.total == 0)
    throw Error(ErrorCode::EmptyStratum,
                "no records with definite verdicts in stratum " + stratum.label());
  std::uint64_t agreeing = table.counts.front() + table.counts.back();
  table.agreement_fraction =
      static_cast<double>(agreeing) / static_cast<double>(table.total);
  return table;
}

std::string render_agreement(const AgreementTable &table) {
  std::ostringstream os;
  os << "stratum: " << table.stratum.label() << "\n";
  if (table.predictors.size() == 2) {
    const std::string &row = table.predictors[0];
    const std::string &col = table.predictors[1];
    std::size_t w = std::max<std::size_t>(row.size() + 14, 26);
    os << pad(row + " \\ " + col, w) << pad_left("compatible", 14)
       << pad_left("incompatible", 14) << "\n";
    for (int r = 0; r < 2; ++r) {
      os << pad(r == 0 ? "compatible" : "incompatible", w);
      for (int c = 0; c < 2; ++c)
        os << pad_left(std::to_string(table.counts[(r ? 1u : 0u) | (c ? 2u : 0u)]),
                       14);
      os << "\n";
    }
  } else {
    for (std::size_t index = 0; index < table.counts.size(); ++index) {
      std::string combo;
      for (std::size_t i = 0; i < table.predictors.size(); ++i) {
        if (i)
          combo += ", ";
        combo += table.predictors[i] + "=" +
                 ((index >> i) & 1 ? "incompatible" : "compatible");
      }
      os << pad(combo, 20) << "  " << table.counts[index] << "\n";
    }
  }
  os << "total: " << table.total << "  excluded: " << table.excluded << "\n";
  os << "agreement: " << fixed(table.agreement_fraction, 4) << " ("
     << fixed(100.0 * table.agreement_fraction, 2) << "%)\n";
  return os.str();
}

std::vector<Stratum> default_strata() {
  return {{false, false}, {false, true}, {true, false}, {true, true}, {}};
}

FrequencyTable breakage_frequency(std::span<const SpliceRecord> records,
                                  const std::string &predictor,
                                  const std::vector<Stratum> &strata) {
  bool any = std::any_of(records.begin(), records.end(), [&](const SpliceRecord &r) {
    return r.predictions.count(predictor) != 0;
  });
  if (!any)
    throw Error(ErrorCode::EmptyStratum,
                "no records carry predictor '" + predictor + "'");
  FrequencyTable table;
  table.predictor = predictor;
  for (const Stratum &stratum : strata) {
    FrequencyColumn column;
    column.stratum = stratum;
    std::map<BreakageCategory, std::uint64_t> hits;
    for (const SpliceRecord &record : records) {
      if (!stratum.contains(record) || incompatible(record, predictor) != true)
        continue;
      ++column.incompatible;
      const Prediction &p = record.predictions.at(predictor);
      std::set<BreakageCategory> present;
      if (p.report)
        for (const Breakage &b : p.report->breakages)
          present.insert(b.category);
      else
        for (const auto &[name, count] : p.breakage_summary)
          if (auto c = parse_category(name); c && count > 0)
            present.insert(*c);
      for (BreakageCategory c : present)
        ++hits[c];
    }
    for (BreakageCategory c : all_breakage_categories) {
      if (column.incompatible == 0)
        column.fractions[c] = std::nullopt;
      else
        column.fractions[c] = static_cast<double>(hits[c]) /
                              static_cast<double>(column.incompatible);
    }
    table.columns.push_back(std::move(column));
  }
  return table;
}

std::string render_frequency(const FrequencyTable &table) {
  std::ostringstream os;
  const std::size_t first = 28;
  std::vector<std::size_t> widths;
  os << pad("category (" + table.predictor + ")", first);
  for (const FrequencyColumn &c : table.columns) {
    std::string label = c.stratum.label();
    widths.push_back(std::max<std::size_t>(label.size() + 2, 10));
    os << pad_left(label, widths.back());
  }
  os << "\n" << pad("incompatible libraries", first);
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << pad_left(std::to_string(table.columns[i].incompatible), widths[i]);
  os << "\n";
  for (BreakageCategory c : all_breakage_categories) {
    os << pad(std::string(to_string(c)), first);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const auto &f = table.columns[i].fractions.at(c);
      os << pad_left(f ? fixed(100.0 * *f, 1) + "%" : "undefined", widths[i]);
    }
    os << "\n";
  }
  return os.str();
}

SonameTable soname_table(std::span<const SpliceRecord> records) {
  SonameTable t;
  for (const SpliceRecord &r : records)
    ++t.counts[r.pair.filename_changed ? 1 : 0][r.soname_changed ? 1 : 0];
  return t;
}

std::string render_soname(const SonameTable &table) {
  std::ostringstream os;
  os << pad("filename \\ soname", 20) << pad_left("unchanged", 12)
     << pad_left("changed", 12) << "\n";
  for (int r = 0; r < 2; ++r) {
    os << pad(r ? "changed" : "unchanged", 20);
    for (int c = 0; c < 2; ++c)
      os << pad_left(std::to_string(table.counts[r][c]), 12);
    os << "\n";
  }
  return os.str();
}

std::string DistributionSummary::render() const {
  return fixed(mean, 1) + "^{" + fixed(max, 1) + "}_{" + fixed(min, 1) + "}";
}

DistributionSummary summarize_groups(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("summarize_groups needs at least one value");
  DistributionSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

ThroughputTable throughput(std::span<const SpliceRecord> records) {
  ThroughputTable table;
  for (const SpliceRecord &r : records) {
    for (const auto &[name, p] : r.predictions) {
      PredictorThroughput &t = table.predictors[name];
      t.bytes += r.pair.old_size_bytes + r.pair.new_size_bytes;
      ++t.runs;
      if (p.elapsed_ns == 0) {
        ++t.zero_elapsed_guarded;
        t.elapsed_ns += 1;
      } else {
        t.elapsed_ns += p.elapsed_ns;
      }
    }
  }
  for (auto &[name, t] : table.predictors)
    t.bytes_per_second = t.elapsed_ns == 0
                             ? 0.0
                             : static_cast<double>(t.bytes) * 1e9 /
                                   static_cast<double>(t.elapsed_ns);
  for (const auto &[a, ta] : table.predictors)
    for (const auto &[b, tb] : table.predictors)
      table.ratio[a][b] =
          tb.bytes_per_second > 0 ? ta.bytes_per_second / tb.bytes_per_second : 0.0;
  return table;
}

std::string render_throughput(const ThroughputTable &table) {
  std::ostringstream os;
  os << pad("predictor", 12) << pad_left("runs", 8) << pad_left("bytes", 14)
     << pad_left("seconds", 14) << pad_left("bytes/s", 18) << "\n";
  for (const auto &[name, t] : table.predictors) {
    os << pad(name, 12) << pad_left(std::to_string(t.runs), 8)
       << pad_left(std::to_string(t.bytes), 14)
       << pad_left(fixed(static_cast<double>(t.elapsed_ns) / 1e9, 6), 14)
       << pad_left(fixed(t.bytes_per_second, 0), 18);
    if (t.zero_elapsed_guarded)
      os << "  (" << t.zero_elapsed_guarded << " zero-time runs clamped to 1 ns)";
    os << "\n";
  }
  if (table.predictors.size() > 1) {
    os << "speed ratio (row / column):\n" << pad("", 12);
    for (const auto &[b, _] : table.predictors)
      os << pad_left(b, 12);
    os << "\n";
    for (const auto &[a, row] : table.ratio) {
      os << pad(a, 12);
      for (const auto &[b, v] : row)
        os << pad_left(fixed(v, 2), 12);
      os << "\n";
    }
  }
  return os.str();
}

} // namespace abirift
