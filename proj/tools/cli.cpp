// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "abirift/corpus.hpp"
#include "abirift/demangle.hpp"
#include "abirift/diff.hpp"
#include "abirift/elf_reader.hpp"
#include "abirift/error.hpp"
#include "abirift/splice.hpp"
#include "abirift/stats.hpp"
#include "abirift/symbols.hpp"

namespace abirift::cli {

namespace fs = std::filesystem;

namespace {

/// ABIRIFT_DEBUG_DIRS, split on ':'.
std::vector<fs::path> env_debug_dirs() {
  std::vector<fs::path> dirs;
  const char *value = std::getenv("ABIRIFT_DEBUG_DIRS");
  if (!value)
    return dirs;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ':'))
    if (!item.empty())
      dirs.emplace_back(item);
  return dirs;
}

std::vector<fs::path> debug_dirs_or_env(const std::vector<std::string> &given) {
  if (given.empty())
    return env_debug_dirs();
  return {given.begin(), given.end()};
}

int exit_for(Verdict v) {
  switch (v) {
  case Verdict::Compatible:
    return exit_compatible;
  case Verdict::Incompatible:
    return exit_incompatible;
  case Verdict::Unknown:
    return exit_unknown;
  }
  return exit_unknown;
}

ElfFile open_input(const fs::path &path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  if (is_linker_script(path))
    throw Error(ErrorCode::NotElf, path.string() + ": not an ELF object");
  return open_elf(path);
}

struct ExportsArgs {
  std::string path;
  bool json = false;
};

int cmd_exports(const ExportsArgs &a, std::ostream &out) {
  ElfFile elf = open_input(a.path);
  ExportSet exports;
  try {
    exports = exported(read_symbols(elf));
  } catch (const Error &e) {
    if (e.code() != ErrorCode::MissingSymbolTables)
      throw;
  }
  if (a.json) {
    out << exports_to_json(exports) << "\n";
    return exit_compatible;
  }
  for (const ExportedSymbol &e : exports)
    out << e.id.to_string() << "\t" << to_string(e.sym_type) << "\t" << e.size
        << "\t" << display_name(e.id.name) << "\n";
  return exit_compatible;
}

struct DiffArgs {
  std::string old_path;
  std::string new_path;
  bool symbols_only = false;
  std::vector<std::string> debug_dirs;
  bool json = false;
};

int cmd_diff(const DiffArgs &a, std::ostream &out) {
  open_input(a.old_path);
  open_input(a.new_path);
  DiffReport report;
  if (a.symbols_only) {
    report = predict_symbols(a.old_path, a.new_path);
  } else {
    std::vector<fs::path> dirs = debug_dirs_or_env(a.debug_dirs);
    report = predict_corpus(a.old_path, a.new_path, {dirs, dirs});
  }
  if (a.json)
    out << report_to_json(report) << "\n";
  else
    out << render_report(report);
  return exit_for(report.verdict);
}

struct DumpArgs {
  std::string path;
  std::vector<std::string> debug_dirs;
};

int cmd_dump(const DumpArgs &a, std::ostream &out) {
  ElfFile elf = open_input(a.path);
  std::vector<fs::path> dirs = debug_dirs_or_env(a.debug_dirs);
  AbiCorpus corpus = build_corpus(elf, locate_debug_info(elf, dirs));
  out << corpus_to_json(corpus) << "\n";
  return exit_compatible;
}

struct SpliceArgs {
  std::string old_root;
  std::string new_root;
  std::vector<std::string> predictors{"corpus", "symbols"};
  std::string out_dir;
  unsigned jobs = 1;
  std::vector<std::string> debug_dirs;
};

int cmd_splice(const SpliceArgs &a, std::ostream &out, std::ostream &err) {
  SpliceOptions options;
  options.predictors = a.predictors;
  options.jobs = std::max(1u, a.jobs);
  options.debug_dirs = debug_dirs_or_env(a.debug_dirs);
  SpliceRun run = splice(a.old_root, a.new_root, options);
  if (a.out_dir.empty()) {
    for (const SpliceRecord &r : run.records)
      out << record_to_json(r) << "\n";
  } else {
    write_splice_output(run, a.out_dir);
  }
  err << "abirift: " << run.records.size() << " pairs, "
      << run.match.ambiguities.size() << " ambiguous keys, "
      << run.match.excluded_linker_scripts.size() << " linker scripts excluded, "
      << run.match.errors.size() << " errors\n";
  return exit_compatible;
}

struct ReportArgs {
  std::vector<std::string> files;
  std::vector<std::string> stratify;
  std::string table = "agreement";
  std::vector<std::string> predictors{"corpus", "symbols"};
};

std::vector<Stratum> strata_for(const std::vector<std::string> &dims) {
  bool by_filename = std::count(dims.begin(), dims.end(), "filename") > 0;
  bool by_soname = std::count(dims.begin(), dims.end(), "soname") > 0;
  std::vector<std::optional<bool>> f{std::nullopt};
  std::vector<std::optional<bool>> s{std::nullopt};
  if (by_filename)
    f = {false, true};
  if (by_soname)
    s = {false, true};
  std::vector<Stratum> out;
  if (by_filename || by_soname)
    for (const auto &fv : f)
      for (const auto &sv : s)
        out.push_back({fv, sv});
  out.push_back({});
  return out;
}

std::vector<SpliceRecord> filter(std::span<const SpliceRecord> records,
                                 const Stratum &stratum) {
  std::vector<SpliceRecord> out;
  for (const SpliceRecord &r : records)
    if (stratum.contains(r))
      out.push_back(r);
  return out;
}

void report_agreement(const std::vector<std::vector<SpliceRecord>> &groups,
                      const std::vector<SpliceRecord> &pooled,
                      const std::vector<Stratum> &strata,
                      const std::vector<std::string> &predictors,
                      std::ostream &out) {
  for (const Stratum &stratum : strata) {
    try {
      out << render_agreement(agreement(pooled, predictors, stratum));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::EmptyStratum)
        throw;
      out << "stratum: " << stratum.label() << "\nagreement: undefined (no records)\n";
      continue;
    }
    if (groups.size() > 1) {
      std::vector<double> fractions;
      for (const auto &g : groups) {
        try {
          fractions.push_back(agreement(g, predictors, stratum).agreement_fraction *
                              100.0);
        } catch (const Error &e) {
          if (e.code() != ErrorCode::EmptyStratum)
            throw;
        }
      }
      out << "agreement % across " << fractions.size() << " groups: "
          << summarize_groups(fractions).render() << "\n";
    }
    out << "\n";
  }
}

void report_frequency(const std::vector<std::vector<SpliceRecord>> &groups,
                      const std::vector<SpliceRecord> &pooled,
                      const std::vector<Stratum> &strata,
                      const std::string &predictor, std::ostream &out) {
  out << render_frequency(breakage_frequency(pooled, predictor, strata));
  if (groups.size() < 2)
    return;
  std::vector<FrequencyTable> tables;
  for (const auto &g : groups) {
    try {
      tables.push_back(breakage_frequency(g, predictor, strata));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::EmptyStratum)
        throw;
    }
  }
  out << "\nper-group summary (% of incompatible libraries, mean^{max}_{min}):\n";
  for (std::size_t i = 0; i < strata.size(); ++i) {
    out << strata[i].label() << ":\n";
    for (BreakageCategory c : all_breakage_categories) {
      std::vector<double> values;
      for (const FrequencyTable &t : tables)
        if (const auto &f = t.columns[i].fractions.at(c))
          values.push_back(*f * 100.0);
      out << "  " << to_string(c) << ": "
          << (values.empty() ? std::string("undefined")
                             : summarize_groups(values).render())
          << "\n";
    }
  }
}

void report_throughput(const std::vector<std::vector<SpliceRecord>> &groups,
                       const std::vector<SpliceRecord> &pooled,
                       const std::vector<Stratum> &strata,
                       const std::vector<std::string> &predictors,
                       std::ostream &out) {
  for (const Stratum &stratum : strata) {
    std::vector<SpliceRecord> selected = filter(pooled, stratum);
    out << "stratum: " << stratum.label() << "\n";
    if (selected.empty()) {
      out << "no records\n\n";
      continue;
    }
    out << render_throughput(throughput(selected));
    if (groups.size() > 1 && predictors.size() >= 2) {
      for (std::size_t i = 0; i < predictors.size(); ++i)
        for (std::size_t j = 0; j < predictors.size(); ++j) {
          if (i == j)
            continue;
          std::vector<double> ratios;
          for (const auto &g : groups) {
            ThroughputTable t = throughput(filter(g, stratum));
            auto a = t.predictors.find(predictors[i]);
            auto b = t.predictors.find(predictors[j]);
            if (a != t.predictors.end() && b != t.predictors.end() &&
                b->second.bytes_per_second > 0)
              ratios.push_back(a->second.bytes_per_second /
                               b->second.bytes_per_second);
          }
          if (!ratios.empty())
            out << predictors[i] << "/" << predictors[j] << " speed ratio across "
                << ratios.size() << " groups: " << summarize_groups(ratios).render()
                << "\n";
        }
    }
    out << "\n";
  }
}

int cmd_report(const ReportArgs &a, std::ostream &out, std::ostream &err) {
  std::vector<std::vector<SpliceRecord>> groups;
  std::vector<SpliceRecord> pooled;
  for (const std::string &file : a.files) {
    std::vector<SpliceRecord> records = read_records(file);
    pooled.insert(pooled.end(), records.begin(), records.end());
    groups.push_back(std::move(records));
  }
  if (pooled.empty()) {
    err << "abirift: report: no records in input\n";
    return exit_usage;
  }
  if (a.table == "agreement") {
    if (a.predictors.size() < 2) {
      err << "abirift: report: agreement needs at least two predictors\n";
      return exit_usage;
    }
    report_agreement(groups, pooled, strata_for(a.stratify), a.predictors, out);
  } else if (a.table == "frequency") {
    std::vector<Stratum> strata =
        a.stratify.empty() ? default_strata() : strata_for(a.stratify);
    report_frequency(groups, pooled, strata, a.predictors.front(), out);
  } else if (a.table == "throughput") {
    report_throughput(groups, pooled, strata_for(a.stratify), a.predictors, out);
  } else {
    out << render_soname(soname_table(pooled));
  }
  return exit_compatible;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"ABI compatibility checks for ELF shared libraries", "abirift"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  ExportsArgs exports_args;
  auto *exports_cmd = app.add_subcommand("exports", "List the exported symbols");
  exports_cmd->add_option("path", exports_args.path, "ELF file")->required();
  exports_cmd->add_flag("--json", exports_args.json, "Emit JSON");

  DiffArgs diff_args;
  auto *diff_cmd = app.add_subcommand("diff", "Compare two builds of a library");
  diff_cmd->add_option("old", diff_args.old_path, "Older library")->required();
  diff_cmd->add_option("new", diff_args.new_path, "Newer library")->required();
  diff_cmd->add_flag("--symbols-only", diff_args.symbols_only,
                     "Compare exported symbols only");
  diff_cmd->add_option("--debug-dir", diff_args.debug_dirs,
                       "Separate debug info root (repeatable)");
  diff_cmd->add_flag("--json", diff_args.json, "Emit JSON");

  DumpArgs dump_args;
  auto *dump_cmd = app.add_subcommand("dump", "Print the ABI corpus as JSON");
  dump_cmd->add_option("path", dump_args.path, "ELF file")->required();
  dump_cmd->add_option("--debug-dir", dump_args.debug_dirs,
                       "Separate debug info root (repeatable)");

  SpliceArgs splice_args;
  auto *splice_cmd =
      app.add_subcommand("splice", "Run every predictor over two library trees");
  splice_cmd->add_option("old_root", splice_args.old_root, "Older tree")->required();
  splice_cmd->add_option("new_root", splice_args.new_root, "Newer tree")->required();
  splice_cmd->add_option("--predictors", splice_args.predictors,
                         "Comma-separated predictor names")
      ->delimiter(',')
      ->capture_default_str();
  splice_cmd->add_option("--out", splice_args.out_dir,
                         "Directory for records.jsonl and manifest.json");
  splice_cmd->add_option("--jobs", splice_args.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  splice_cmd->add_option("--debug-dir", splice_args.debug_dirs,
                         "Extra debug info root (repeatable)");

  ReportArgs report_args;
  auto *report_cmd = app.add_subcommand("report", "Tabulate splice records");
  report_cmd->add_option("records", report_args.files,
                         "records.jsonl files, one per group")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--stratify", report_args.stratify,
                         "filename and/or soname")
      ->delimiter(',')
      ->check(CLI::IsMember({"filename", "soname"}));
  report_cmd->add_option("--table", report_args.table, "Table to render")
      ->check(CLI::IsMember({"agreement", "frequency", "throughput", "soname"}))
      ->capture_default_str();
  report_cmd->add_option("--predictors", report_args.predictors,
                         "Predictors to compare, first is the row predictor")
      ->delimiter(',')
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return exit_compatible;
    }
    err << "abirift: " << e.what() << "\n";
    err << "run 'abirift --help' for usage\n";
    return exit_usage;
  }

  try {
    if (*exports_cmd)
      return cmd_exports(exports_args, out);
    if (*diff_cmd)
      return cmd_diff(diff_args, out);
    if (*dump_cmd)
      return cmd_dump(dump_args, out);
    if (*splice_cmd)
      return cmd_splice(splice_args, out, err);
    if (*report_cmd)
      return cmd_report(report_args, out, err);
  } catch (const Error &e) {
    err << "abirift: " << e.what() << "\n";
    return exit_input_error;
  } catch (const std::invalid_argument &e) {
    err << "abirift: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception &e) {
    err << "abirift: " << e.what() << "\n";
    return exit_input_error;
  }
  return exit_usage;
}

} // namespace abirift::cli
