// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include <gtest/gtest.h>

#include "abirift/error.hpp"
#include "abirift/stats.hpp"

namespace abirift {
namespace {

using C = BreakageCategory;

/// A record with one prediction per entry of `verdicts`; an absent verdict
/// is a failed prediction.
SpliceRecord make_record(std::map<std::string, std::optional<Verdict>> verdicts,
                         bool filename_changed = false, bool soname_changed = false,
                         std::vector<C> found = {}, std::uint64_t elapsed_ns = 1000,
                         std::uint64_t bytes = 500) {
  SpliceRecord r;
  r.pair.key = {"/lib", "libx"};
  r.pair.filename_changed = filename_changed;
  r.pair.old_size_bytes = bytes;
  r.pair.new_size_bytes = bytes;
  r.soname_changed = soname_changed;
  for (const auto &[name, verdict] : verdicts) {
    Prediction p;
    p.verdict = verdict;
    p.elapsed_ns = elapsed_ns;
    if (verdict) {
      DiffReport report;
      report.verdict = *verdict;
      for (C c : found)
        report.breakages.push_back({c, "s", "", "", Severity::Breaking});
      for (C c : found)
        ++p.breakage_summary[std::string(to_string(c))];
      p.report = report;
    } else {
      p.message = "failed";
    }
    r.predictions[name] = p;
  }
  return r;
}

/// `n` copies of a (corpus, symbols) verdict pair.
void add_pairs(std::vector<SpliceRecord> &out, std::size_t n, Verdict corpus, Verdict symbols) {
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(make_record({{"corpus", corpus}, {"symbols", symbols}}));
}

constexpr Verdict ok = Verdict::Compatible;
constexpr Verdict bad = Verdict::Incompatible;

/// Cells in reading order of a 2x2 table with corpus rows and symbols
/// columns: (c,c), (c,i), (i,c), (i,i).
std::vector<SpliceRecord> grid(std::size_t cc, std::size_t ci, std::size_t ic, std::size_t ii) {
  std::vector<SpliceRecord> out;
  add_pairs(out, cc, ok, ok);
  add_pairs(out, ci, ok, bad);
  add_pairs(out, ic, bad, ok);
  add_pairs(out, ii, bad, bad);
  return out;
}

TEST(Stats, AgreementGrids) {
  struct Case {
    std::size_t cc, ci, ic, ii;
    double expected;
  };
  for (const Case &c : {Case{135, 0, 392, 447, 0.5975}, Case{5274, 0, 1143, 233, 0.8281}}) {
    auto records = grid(c.cc, c.ci, c.ic, c.ii);
    AgreementTable t = agreement(records, {"corpus", "symbols"});
    EXPECT_NEAR(t.agreement_fraction, c.expected, 0.0005);
    EXPECT_EQ(t.total, c.cc + c.ci + c.ic + c.ii);
    EXPECT_EQ(t.excluded, 0u);
    std::array<Verdict, 2> ic_cell{bad, ok};
    std::array<Verdict, 2> ci_cell{ok, bad};
    EXPECT_EQ(t.count(ic_cell), c.ic);
    EXPECT_EQ(t.count(ci_cell), c.ci);
  }
}

TEST(Stats, AgreementRendering) {
  auto records = grid(135, 0, 392, 447);
  EXPECT_EQ(render_agreement(agreement(records, {"corpus", "symbols"})),
            "stratum: all\n"
            "corpus \\ symbols              compatible  incompatible\n"
            "compatible                           135             0\n"
            "incompatible                         392           447\n"
            "total: 974  excluded: 0\n"
            "agreement: 0.5975 (59.75%)\n");
}

TEST(Stats, AgreementExcludesIndefiniteVerdicts) {
  auto records = grid(3, 1, 0, 2);
  records.push_back(make_record({{"corpus", Verdict::Unknown}, {"symbols", ok}}));
  records.push_back(make_record({{"corpus", std::nullopt}, {"symbols", ok}}));
  records.push_back(make_record({{"corpus", ok}}));
  AgreementTable t = agreement(records, {"corpus", "symbols"});
  EXPECT_EQ(t.total, 6u);
  EXPECT_EQ(t.excluded, 3u);
  EXPECT_DOUBLE_EQ(t.agreement_fraction, 5.0 / 6.0);
}

TEST(Stats, AgreementStrata) {
  std::vector<SpliceRecord> records;
  records.push_back(make_record({{"corpus", bad}, {"symbols", bad}}, true, true));
  records.push_back(make_record({{"corpus", bad}, {"symbols", ok}}, true, false));
  records.push_back(make_record({{"corpus", ok}, {"symbols", ok}}, false, false));
  Stratum renamed{true, std::nullopt};
  AgreementTable t = agreement(records, {"corpus", "symbols"}, renamed);
  EXPECT_EQ(t.total, 2u);
  EXPECT_DOUBLE_EQ(t.agreement_fraction, 0.5);

  Stratum neither{false, true};
  try {
    agreement(records, {"corpus", "symbols"}, neither);
    FAIL() << "expected EmptyStratum";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyStratum);
  }
  EXPECT_THROW(agreement(records, {"corpus"}), std::invalid_argument);
}

TEST(Stats, AgreementAcrossThreePredictors) {
  std::vector<SpliceRecord> records;
  records.push_back(make_record({{"a", ok}, {"b", ok}, {"c", ok}}));
  records.push_back(make_record({{"a", bad}, {"b", bad}, {"c", bad}}));
  records.push_back(make_record({{"a", bad}, {"b", ok}, {"c", bad}}));
  AgreementTable t = agreement(records, {"a", "b", "c"});
  EXPECT_EQ(t.counts.size(), 8u);
  EXPECT_EQ(t.counts[0b101], 1u);
  EXPECT_DOUBLE_EQ(t.agreement_fraction, 2.0 / 3.0);
  std::string text = render_agreement(t);
  EXPECT_NE(text.find("a=incompatible, b=compatible, c=incompatible  1"), std::string::npos);
}

TEST(Stats, StratumLabels) {
  EXPECT_EQ(Stratum{}.label(), "all");
  EXPECT_EQ((Stratum{true, std::nullopt}).label(), "filename_changed");
  EXPECT_EQ((Stratum{false, true}).label(), "filename_unchanged+soname_changed");
  EXPECT_EQ((Stratum{std::nullopt, false}).label(), "soname_unchanged");
  EXPECT_EQ(default_strata().size(), 5u);
  EXPECT_EQ(default_strata().back(), Stratum{});
}

TEST(Stats, BreakageFrequency) {
  std::vector<SpliceRecord> records;
  records.push_back(make_record({{"corpus", bad}}, false, false,
                                {C::FunctionRemoved, C::FunctionRemoved, C::SymbolRemoved}));
  records.push_back(make_record({{"corpus", bad}}, false, false, {C::FunctionSubtypeChanged}));
  records.push_back(make_record({{"corpus", ok}}, false, false, {C::FunctionAdded}));
  records.push_back(make_record({{"corpus", bad}}, true, true, {C::SonameChanged}));

  FrequencyTable t = breakage_frequency(records);
  ASSERT_EQ(t.columns.size(), 5u);
  const FrequencyColumn &plain = t.columns[0];
  EXPECT_EQ(plain.incompatible, 2u);
  EXPECT_EQ(plain.fractions.at(C::FunctionRemoved), 0.5); // counted once per library
  EXPECT_EQ(plain.fractions.at(C::FunctionSubtypeChanged), 0.5);
  EXPECT_EQ(plain.fractions.at(C::FunctionAdded), 0.0);
  EXPECT_EQ(plain.fractions.size(), 15u);
  // No incompatible library: every fraction is undefined, not zero.
  EXPECT_EQ(t.columns[1].incompatible, 0u);
  EXPECT_FALSE(t.columns[1].fractions.at(C::FunctionRemoved).has_value());
  EXPECT_EQ(t.columns[3].fractions.at(C::SonameChanged), 1.0);
  EXPECT_EQ(t.columns[4].incompatible, 3u);

  std::string text = render_frequency(t);
  EXPECT_NE(text.find("category (corpus)"), std::string::npos);
  EXPECT_NE(text.find("undefined"), std::string::npos);
  EXPECT_NE(text.find("50.0%"), std::string::npos);

  EXPECT_THROW(breakage_frequency(records, "symbols"), Error);
}

TEST(Stats, FrequencyFallsBackToSummary) {
  SpliceRecord r = make_record({{"corpus", bad}}, false, false, {C::EnumeratorRemoved});
  r.predictions["corpus"].report.reset();
  FrequencyTable t = breakage_frequency(std::vector<SpliceRecord>{r}, "corpus", {Stratum{}});
  EXPECT_EQ(t.columns[0].fractions.at(C::EnumeratorRemoved), 1.0);
}

TEST(Stats, SonameTable) {
  std::vector<SpliceRecord> records;
  records.push_back(make_record({}, false, false));
  records.push_back(make_record({}, true, false));
  records.push_back(make_record({}, true, true));
  records.push_back(make_record({}, true, true));
  SonameTable t = soname_table(records);
  EXPECT_EQ(t.counts[0][0], 1u);
  EXPECT_EQ(t.counts[1][0], 1u);
  EXPECT_EQ(t.counts[1][1], 2u);
  EXPECT_EQ(t.counts[0][1], 0u);
  EXPECT_EQ(render_soname(t),
            "filename \\ soname      unchanged     changed\n"
            "unchanged                      1           0\n"
            "changed                        1           2\n");
}

TEST(Stats, GroupSummary) {
  std::vector<double> values{59.75, 82.81, 70.0};
  DistributionSummary s = summarize_groups(values);
  EXPECT_NEAR(s.mean, 70.853, 0.001);
  EXPECT_EQ(s.max, 82.81);
  EXPECT_EQ(s.min, 59.75);
  EXPECT_EQ(s.render(), "70.9^{82.8}_{59.8}");
  std::vector<double> one{5.0};
  EXPECT_EQ(summarize_groups(one).render(), "5.0^{5.0}_{5.0}");
  EXPECT_THROW(summarize_groups(std::vector<double>{}), std::invalid_argument);
}

TEST(Stats, Throughput) {
  std::vector<SpliceRecord> records;
  // symbols runs 10x faster over the same bytes.
  for (int i = 0; i < 4; ++i) {
    SpliceRecord r = make_record({{"corpus", ok}}, false, false, {}, 10000, 1000);
    r.predictions["symbols"] = make_record({{"symbols", ok}}, false, false, {}, 1000)
                                   .predictions.at("symbols");
    records.push_back(r);
  }
  ThroughputTable t = throughput(records);
  const PredictorThroughput &corpus = t.predictors.at("corpus");
  EXPECT_EQ(corpus.bytes, 8000u);
  EXPECT_EQ(corpus.runs, 4u);
  EXPECT_EQ(corpus.elapsed_ns, 40000u);
  EXPECT_DOUBLE_EQ(corpus.bytes_per_second, 8000 * 1e9 / 40000);
  EXPECT_DOUBLE_EQ(t.ratio.at("symbols").at("corpus"), 10.0);
  EXPECT_DOUBLE_EQ(t.ratio.at("corpus").at("symbols"), 0.1);
  EXPECT_DOUBLE_EQ(t.ratio.at("corpus").at("corpus"), 1.0);

  std::string text = render_throughput(t);
  EXPECT_NE(text.find("speed ratio (row / column):"), std::string::npos);
  EXPECT_NE(text.find("10.00"), std::string::npos);
}

TEST(Stats, ThroughputGuardsZeroTime) {
  std::vector<SpliceRecord> records{make_record({{"symbols", ok}}, false, false, {}, 0, 10)};
  ThroughputTable t = throughput(records);
  const PredictorThroughput &s = t.predictors.at("symbols");
  EXPECT_EQ(s.zero_elapsed_guarded, 1u);
  EXPECT_EQ(s.elapsed_ns, 1u);
  EXPECT_DOUBLE_EQ(s.bytes_per_second, 20e9);
  EXPECT_NE(render_throughput(t).find("1 zero-time runs clamped to 1 ns"), std::string::npos);
}

} // namespace
} // namespace abirift
