// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/splice.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "abirift/corpus.hpp"
#include "abirift/elf_reader.hpp"
#include "abirift/error.hpp"
#include "abirift/symbols.hpp"
#include "report_json.hpp"

#ifndef ABIRIFT_VERSION
#define ABIRIFT_VERSION "0.0.0"
#endif

namespace abirift {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<fs::path> debug_roots(const std::vector<fs::path> &user,
                                  const fs::path &root) {
  std::vector<fs::path> roots = user;
  roots.push_back(root / "usr/lib/debug");
  return roots;
}

Prediction run_predictor(const PredictorFn &fn, const MatchedPair &pair,
                         const PredictorContext &context) {
  Prediction p;
  auto start = std::chrono::steady_clock::now();
  try {
    DiffReport report = fn(pair, context);
    auto stop = std::chrono::steady_clock::now();
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
                  .count();
    p.elapsed_ns = ns > 0 ? static_cast<std::uint64_t>(ns) : 1;
    report.elapsed_ns = p.elapsed_ns;
    p.verdict = report.verdict;
    for (const Breakage &b : report.breakages)
      ++p.breakage_summary[std::string(to_string(b.category))];
    p.report = std::move(report);
  } catch (const std::exception &e) {
    auto stop = std::chrono::steady_clock::now();
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
                  .count();
    p.elapsed_ns = ns > 0 ? static_cast<std::uint64_t>(ns) : 1;
    p.message = e.what();
  }
  return p;
}

json optional_string(const std::optional<std::string> &s) {
  return s ? json(*s) : json(nullptr);
}

std::optional<std::string> read_optional_string(const json &j) {
  if (j.is_null())
    return std::nullopt;
  return j.get<std::string>();
}

json key_json(const LibraryKey &key) {
  return {{"parent_dir", key.parent_dir}, {"prefix", key.prefix}};
}

std::optional<std::string> soname_of(const fs::path &lib) {
  return read_soname(open_elf(lib)).soname;
}

} // namespace

std::string_view library_version() { return ABIRIFT_VERSION; }

DiffReport predict_symbols(const fs::path &old_lib, const fs::path &new_lib) {
  auto load = [](const fs::path &path) {
    ElfFile elf = open_elf(path);
    try {
      return exported(read_symbols(elf));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::MissingSymbolTables)
        throw;
      return ExportSet{};
    }
  };
  ExportSet old_exports = load(old_lib);
  ExportSet new_exports = load(new_lib);
  SymbolsVerdict verdict = missing_previously_found_exports(old_exports, new_exports);

  DiffReport report;
  report.predictor = "symbols";
  report.mode = DiffMode::SymbolsOnly;
  report.verdict = verdict.compatible ? Verdict::Compatible : Verdict::Incompatible;
  for (const ExportedSymbol &e : verdict.missing)
    report.breakages.push_back({BreakageCategory::SymbolRemoved, e.id.to_string(),
                                std::string(to_string(e.sym_type)), "",
                                Severity::Breaking});
  return report;
}

DiffReport predict_corpus(const fs::path &old_lib, const fs::path &new_lib,
                          const PredictorContext &context) {
  auto load = [](const fs::path &path, const std::vector<fs::path> &roots) {
    ElfFile elf = open_elf(path);
    return build_corpus(elf, locate_debug_info(elf, roots));
  };
  AbiCorpus old_corpus = load(old_lib, context.old_debug_roots);
  AbiCorpus new_corpus = load(new_lib, context.new_debug_roots);
  DiffReport report = diff_corpora(old_corpus, new_corpus);
  report.predictor = "corpus";
  return report;
}

std::map<std::string, PredictorFn> builtin_predictors() {
  return {
      {"symbols",
       [](const MatchedPair &pair, const PredictorContext &) {
         return predict_symbols(pair.old_path, pair.new_path);
       }},
      {"corpus",
       [](const MatchedPair &pair, const PredictorContext &context) {
         return predict_corpus(pair.old_path, pair.new_path, context);
       }},
  };
}

SpliceRun splice(const fs::path &old_root, const fs::path &new_root,
                 const SpliceOptions &options) {
  std::map<std::string, PredictorFn> available = builtin_predictors();
  for (const auto &[name, fn] : options.extra_predictors)
    available[name] = fn;
  std::vector<std::pair<std::string, PredictorFn>> chosen;
  for (const std::string &name : options.predictors) {
    auto it = available.find(name);
    if (it == available.end())
      throw std::invalid_argument("unknown predictor '" + name + "'");
    chosen.emplace_back(name, it->second);
  }
  if (chosen.empty())
    throw std::invalid_argument("no predictors selected");

  SpliceRun run;
  run.old_root = old_root;
  run.new_root = new_root;
  for (const auto &c : chosen)
    run.predictors.push_back(c.first);
  run.timestamp = utc_timestamp();
  run.match = match_roots(old_root, new_root);

  PredictorContext context{debug_roots(options.debug_dirs, old_root),
                           debug_roots(options.debug_dirs, new_root)};
  const auto &pairs = run.match.pairs;
  run.records.resize(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      SpliceRecord &record = run.records[i];
      record.pair = pairs[i];
      try {
        record.old_soname = soname_of(pairs[i].old_path);
        record.new_soname = soname_of(pairs[i].new_path);
        record.soname_changed = record.old_soname != record.new_soname;
      } catch (const Error &) {
        record.soname_changed = false;
      }
      for (const auto &[name, fn] : chosen)
        record.predictions[name] = run_predictor(fn, pairs[i], context);
    }
  };
  unsigned jobs = std::max(1u, options.jobs);
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(pairs.size(), 1)));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < jobs; ++t)
    threads.emplace_back(worker);
  worker();
  for (auto &t : threads)
    t.join();
  return run;
}

std::string record_to_json(const SpliceRecord &record) {
  json predictions = json::object();
  for (const auto &[name, p] : record.predictions) {
    json summary = json::object();
    for (const auto &[category, count] : p.breakage_summary)
      summary[category] = count;
    predictions[name] = {
        {"verdict", p.verdict ? json(to_string(*p.verdict)) : json("error")},
        {"elapsed_ns", p.elapsed_ns},
        {"breakage_summary", std::move(summary)},
        {"report", p.report ? detail::report_json(*p.report) : json(nullptr)},
        {"message", optional_string(p.message)}};
  }
  const MatchedPair &pair = record.pair;
  json j = {{"record_version", 1},
            {"key", key_json(pair.key)},
            {"old_path", pair.old_path.string()},
            {"new_path", pair.new_path.string()},
            {"old_size_bytes", pair.old_size_bytes},
            {"new_size_bytes", pair.new_size_bytes},
            {"filename_changed", pair.filename_changed},
            {"soname_changed", record.soname_changed},
            {"old_soname", optional_string(record.old_soname)},
            {"new_soname", optional_string(record.new_soname)},
            {"predictions", std::move(predictions)}};
  return j.dump();
}

SpliceRecord parse_record(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::InvalidRecord, "record is not a JSON object");
  try {
    if (j.at("record_version").get<int>() != 1)
      throw Error(ErrorCode::InvalidRecord, "unsupported record_version");
    SpliceRecord r;
    r.pair.key = {j.at("key").at("parent_dir").get<std::string>(),
                  j.at("key").at("prefix").get<std::string>()};
    r.pair.old_path = j.at("old_path").get<std::string>();
    r.pair.new_path = j.at("new_path").get<std::string>();
    r.pair.old_size_bytes = detail::unsigned_field(j.at("old_size_bytes"));
    r.pair.new_size_bytes = detail::unsigned_field(j.at("new_size_bytes"));
    r.pair.filename_changed = j.at("filename_changed").get<bool>();
    r.soname_changed = j.at("soname_changed").get<bool>();
    r.old_soname = read_optional_string(j.at("old_soname"));
    r.new_soname = read_optional_string(j.at("new_soname"));
    for (const auto &[name, p] : j.at("predictions").items()) {
      Prediction pred;
      std::string verdict = p.at("verdict").get<std::string>();
      if (verdict != "error") {
        pred.verdict = parse_verdict(verdict);
        if (!pred.verdict)
          throw Error(ErrorCode::InvalidRecord, "bad verdict " + verdict);
      }
      pred.elapsed_ns = detail::unsigned_field(p.at("elapsed_ns"));
      for (const auto &[category, count] : p.at("breakage_summary").items())
        pred.breakage_summary[category] = detail::unsigned_field(count);
      if (!p.at("report").is_null())
        pred.report = detail::report_from(p.at("report"));
      pred.message = read_optional_string(p.at("message"));
      r.predictions.emplace(name, std::move(pred));
    }
    return r;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::InvalidRecord, e.what());
  }
}

std::string manifest_to_json(const SpliceRun &run) {
  auto keys = [](const std::vector<LibraryKey> &list) {
    json out = json::array();
    for (const LibraryKey &k : list)
      out.push_back(key_json(k));
    return out;
  };
  json ambiguities = json::array();
  for (const Ambiguity &a : run.match.ambiguities) {
    json candidates = json::array();
    for (const auto &c : a.candidates)
      candidates.push_back(c.string());
    ambiguities.push_back({{"side", a.side},
                           {"key", key_json(a.key)},
                           {"candidates", std::move(candidates)}});
  }
  json scripts = json::array();
  for (const auto &s : run.match.excluded_linker_scripts)
    scripts.push_back(s.generic_string());
  json doc = {{"manifest_version", 1},
              {"tool", "abirift"},
              {"version", library_version()},
              {"timestamp", run.timestamp},
              {"old_root", run.old_root.string()},
              {"new_root", run.new_root.string()},
              {"predictors", run.predictors},
              {"key_basis", "resolved"},
              {"pair_count", run.match.pairs.size()},
              {"unmatched_old", keys(run.match.unmatched_old)},
              {"unmatched_new", keys(run.match.unmatched_new)},
              {"ambiguities", std::move(ambiguities)},
              {"excluded_linker_scripts", std::move(scripts)},
              {"errors", run.match.errors}};
  return doc.dump(2);
}

void write_splice_output(const SpliceRun &run, const fs::path &out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot create " + out_dir.string());
  std::ofstream records(out_dir / "records.jsonl", std::ios::trunc);
  for (const SpliceRecord &r : run.records)
    records << record_to_json(r) << '\n';
  std::ofstream manifest(out_dir / "manifest.json", std::ios::trunc);
  manifest << manifest_to_json(run) << '\n';
  if (!records || !manifest)
    throw Error(ErrorCode::IoError, "cannot write under " + out_dir.string());
}

std::vector<SpliceRecord> read_records(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<SpliceRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      out.push_back(parse_record(line));
    } catch (const Error &e) {
      throw Error(ErrorCode::InvalidRecord,
                  path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

} // namespace abirift
