// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/diff.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "abirift/demangle.hpp"
#include "abirift/error.hpp"
#include "report_json.hpp"

namespace abirift {

namespace {

/// Fingerprint options for comparing types across `oc` and `nc`: records
/// declared but not defined on either side compare by name.
FingerprintOptions across(const AbiCorpus &oc, const AbiCorpus &nc,
                          bool include_enumerators) {
  FingerprintOptions options;
  options.include_enumerators = include_enumerators;
  options.opaque_records = declaration_only_records(oc);
  options.opaque_records.merge(declaration_only_records(nc));
  return options;
}

Breakage breaking(BreakageCategory category, std::string subject,
                  std::string before, std::string after) {
  return {category, std::move(subject), std::move(before), std::move(after),
          Severity::Breaking};
}

std::string parameter_list(const AbiCorpus &corpus, const FunctionDecl &fn) {
  std::string s = "(";
  for (std::size_t i = 0; i < fn.parameters.size(); ++i)
    s += (i ? ", " : "") + type_spelling(corpus, fn.parameters[i]);
  if (fn.varargs)
    s += fn.parameters.empty() ? "..." : ", ...";
  return s + ")";
}

/// Signature for display: the demangled form when there is one, otherwise
/// the source name with the DWARF parameter list.
std::string signature(const AbiCorpus &corpus, const FunctionDecl &fn) {
  auto parsed = demangle(fn.linkage_name);
  if (auto *dn = std::get_if<DemangledName>(&parsed))
    return dn->render();
  if (!fn.described)
    return fn.linkage_name;
  return fn.display_name + parameter_list(corpus, fn);
}

std::string fingerprint_or_void(const AbiCorpus &corpus, std::optional<TypeId> ref,
                                const FingerprintOptions &layout) {
  return ref ? type_fingerprint(corpus, *ref, layout) : std::string("void");
}

void compare_signatures(const AbiCorpus &oc, const FunctionDecl &of,
                        const AbiCorpus &nc, const FunctionDecl &nf,
                        const FingerprintOptions &layout,
                        std::vector<Breakage> &out) {
  if (!of.described || !nf.described)
    return;
  std::string subject = signature(oc, of);
  std::string old_params = parameter_list(oc, of);
  std::string new_params = parameter_list(nc, nf);
  if (old_params != new_params) {
    out.push_back(breaking(BreakageCategory::FunctionParamChanged, subject,
                           old_params, new_params));
  } else {
    for (std::size_t i = 0; i < of.parameters.size(); ++i) {
      if (type_fingerprint(oc, of.parameters[i], layout) ==
          type_fingerprint(nc, nf.parameters[i], layout))
        continue;
      std::string spelled = type_spelling(oc, of.parameters[i]);
      std::string where = "parameter " + std::to_string(i + 1) + " (";
      out.push_back(breaking(BreakageCategory::FunctionSubtypeChanged, subject,
                             where + spelled + ") layout " +
                                 type_fingerprint(oc, of.parameters[i], layout),
                             where + spelled + ") layout " +
                                 type_fingerprint(nc, nf.parameters[i], layout)));
      break;
    }
  }
  std::string old_ret = type_spelling(oc, of.return_type);
  std::string new_ret = type_spelling(nc, nf.return_type);
  if (old_ret != new_ret ||
      fingerprint_or_void(oc, of.return_type, layout) !=
          fingerprint_or_void(nc, nf.return_type, layout))
    out.push_back(breaking(BreakageCategory::FunctionReturnTypeChanged, subject,
                           old_ret, new_ret));
}

std::optional<std::string> demangled_base(const std::string &linkage_name) {
  auto parsed = demangle(linkage_name);
  if (auto *dn = std::get_if<DemangledName>(&parsed))
    return base_name(*dn);
  return std::nullopt;
}

std::map<std::string, const TypeDescriptor *>
enumerations_by_name(const AbiCorpus &corpus) {
  std::map<std::string, const TypeDescriptor *> out;
  for (const auto &[id, t] : corpus.types)
    if (t.kind == TypeKind::Enumeration && t.name && !t.declaration_only)
      out.emplace(*t.name, &t);
  return out;
}

bool on_abi_surface(const GlobalVar &g) {
  return g.linkage == Linkage::External && g.is_exported;
}

void sort_unique(std::vector<Breakage> &list) {
  std::stable_sort(list.begin(), list.end(),
                   [](const Breakage &a, const Breakage &b) {
                     return std::tie(a.category, a.subject) <
                            std::tie(b.category, b.subject);
                   });
  list.erase(std::unique(list.begin(), list.end(),
                         [](const Breakage &a, const Breakage &b) {
                           return a.category == b.category &&
                                  a.subject == b.subject;
                         }),
             list.end());
}

} // namespace

std::string_view to_string(BreakageCategory category) {
  switch (category) {
  case BreakageCategory::FunctionRemoved:
    return "FunctionRemoved";
  case BreakageCategory::FunctionAdded:
    return "FunctionAdded";
  case BreakageCategory::FunctionParamChanged:
    return "FunctionParamChanged";
  case BreakageCategory::FunctionSubtypeChanged:
    return "FunctionSubtypeChanged";
  case BreakageCategory::FunctionReturnTypeChanged:
    return "FunctionReturnTypeChanged";
  case BreakageCategory::VtableEntryAdded:
    return "VtableEntryAdded";
  case BreakageCategory::VtableEntryRemoved:
    return "VtableEntryRemoved";
  case BreakageCategory::EnumeratorAdded:
    return "EnumeratorAdded";
  case BreakageCategory::EnumeratorRemoved:
    return "EnumeratorRemoved";
  case BreakageCategory::EnumeratorValueChanged:
    return "EnumeratorValueChanged";
  case BreakageCategory::GlobalVariableRemoved:
    return "GlobalVariableRemoved";
  case BreakageCategory::GlobalVariableTypeChanged:
    return "GlobalVariableTypeChanged";
  case BreakageCategory::GlobalLinkageChanged:
    return "GlobalLinkageChanged";
  case BreakageCategory::SonameChanged:
    return "SonameChanged";
  case BreakageCategory::SymbolRemoved:
    return "SymbolRemoved";
  }
  return "SymbolRemoved";
}

std::optional<BreakageCategory> parse_category(std::string_view text) {
  for (BreakageCategory c : all_breakage_categories)
    if (to_string(c) == text)
      return c;
  return std::nullopt;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
  case Verdict::Compatible:
    return "compatible";
  case Verdict::Incompatible:
    return "incompatible";
  case Verdict::Unknown:
    break;
  }
  return "unknown";
}

std::string_view to_string(DiffMode mode) {
  return mode == DiffMode::FullDwarf ? "full_dwarf" : "symbols_only";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (Verdict v : {Verdict::Compatible, Verdict::Incompatible, Verdict::Unknown})
    if (to_string(v) == text)
      return v;
  return std::nullopt;
}

std::vector<Breakage> diff_functions(const AbiCorpus &oc, const AbiCorpus &nc) {
  std::vector<Breakage> out;
  const FingerprintOptions layout = across(oc, nc, false);
  std::vector<const FunctionDecl *> removed;
  std::vector<const FunctionDecl *> added;

  for (const auto &[name, of] : oc.functions) {
    if (!of.is_exported)
      continue;
    auto it = nc.functions.find(name);
    if (it == nc.functions.end() || !it->second.is_exported) {
      removed.push_back(&of);
      continue;
    }
    compare_signatures(oc, of, nc, it->second, layout, out);
  }
  for (const auto &[name, nf] : nc.functions) {
    if (!nf.is_exported)
      continue;
    auto it = oc.functions.find(name);
    if (it == oc.functions.end() || !it->second.is_exported)
      added.push_back(&nf);
  }

  std::vector<bool> consumed(added.size(), false);
  for (const FunctionDecl *r : removed) {
    std::optional<std::string> base = demangled_base(r->linkage_name);
    bool matched = false;
    if (base) {
      for (std::size_t i = 0; i < added.size(); ++i) {
        if (consumed[i] || demangled_base(added[i]->linkage_name) != base)
          continue;
        consumed[i] = true;
        matched = true;
        out.push_back(breaking(BreakageCategory::FunctionParamChanged, *base,
                               signature(oc, *r), signature(nc, *added[i])));
        break;
      }
    }
    if (!matched)
      out.push_back(breaking(BreakageCategory::FunctionRemoved, signature(oc, *r),
                             r->linkage_name, ""));
  }
  for (std::size_t i = 0; i < added.size(); ++i)
    if (!consumed[i])
      out.push_back({BreakageCategory::FunctionAdded, signature(nc, *added[i]), "",
                     added[i]->linkage_name, Severity::Informational});
  return out;
}

std::vector<Breakage> diff_vtables(const AbiCorpus &oc, const AbiCorpus &nc) {
  std::vector<Breakage> out;
  for (const auto &[cls, ov] : oc.vtables) {
    auto it = nc.vtables.find(cls);
    if (it == nc.vtables.end())
      continue;
    const VTable &nv = it->second;
    auto contains = [](const VTable &t, const VTableEntry &e) {
      return std::find(t.entries.begin(), t.entries.end(), e) != t.entries.end();
    };
    for (const VTableEntry &e : ov.entries)
      if (!contains(nv, e))
        out.push_back(breaking(BreakageCategory::VtableEntryRemoved,
                               cls + "::" + e.function,
                               "slot " + std::to_string(e.slot), ""));
    for (const VTableEntry &e : nv.entries)
      if (!contains(ov, e))
        out.push_back(breaking(BreakageCategory::VtableEntryAdded,
                               cls + "::" + e.function, "",
                               "slot " + std::to_string(e.slot)));
  }
  return out;
}

std::vector<Breakage> diff_enums(const AbiCorpus &oc, const AbiCorpus &nc,
                                 const DiffOptions &options) {
  std::vector<Breakage> out;
  auto old_enums = enumerations_by_name(oc);
  auto new_enums = enumerations_by_name(nc);
  for (const auto &[name, oe] : old_enums) {
    auto it = new_enums.find(name);
    if (it == new_enums.end())
      continue;
    const TypeDescriptor &ne = *it->second;
    auto find = [](const TypeDescriptor &t, const std::string &label) {
      return std::find_if(t.enumerators.begin(), t.enumerators.end(),
                          [&](const Enumerator &e) { return e.label == label; });
    };
    for (const Enumerator &e : oe->enumerators) {
      auto hit = find(ne, e.label);
      if (hit == ne.enumerators.end())
        out.push_back(breaking(BreakageCategory::EnumeratorRemoved,
                               name + "::" + e.label, std::to_string(e.value), ""));
      else if (hit->value != e.value)
        out.push_back(breaking(BreakageCategory::EnumeratorValueChanged,
                               name + "::" + e.label, std::to_string(e.value),
                               std::to_string(hit->value)));
    }
    for (const Enumerator &e : ne.enumerators)
      if (find(*oe, e.label) == oe->enumerators.end())
        out.push_back({BreakageCategory::EnumeratorAdded, name + "::" + e.label,
                       "", std::to_string(e.value),
                       options.enumerator_added_breaking ? Severity::Breaking
                                                         : Severity::Informational});
  }
  return out;
}

std::vector<Breakage> diff_globals(const AbiCorpus &oc, const AbiCorpus &nc) {
  std::vector<Breakage> out;
  const FingerprintOptions full = across(oc, nc, true);
  for (const auto &[name, og] : oc.globals) {
    if (!on_abi_surface(og))
      continue;
    auto it = nc.globals.find(name);
    if (it == nc.globals.end()) {
      out.push_back(breaking(BreakageCategory::GlobalVariableRemoved, name,
                             type_spelling(oc, og.type), ""));
      continue;
    }
    const GlobalVar &ng = it->second;
    if (ng.linkage == Linkage::Internal) {
      out.push_back(breaking(BreakageCategory::GlobalLinkageChanged, name,
                             "external", "internal"));
      continue;
    }
    if (!ng.is_exported) {
      out.push_back(breaking(BreakageCategory::GlobalVariableRemoved, name,
                             type_spelling(oc, og.type), ""));
      continue;
    }
    if (type_fingerprint(oc, og.type, full) != type_fingerprint(nc, ng.type, full) ||
        type_spelling(oc, og.type) != type_spelling(nc, ng.type))
      out.push_back(breaking(BreakageCategory::GlobalVariableTypeChanged, name,
                             type_spelling(oc, og.type),
                             type_spelling(nc, ng.type)));
  }
  return out;
}

std::vector<Breakage> diff_soname(const AbiCorpus &oc, const AbiCorpus &nc) {
  if (oc.soname == nc.soname)
    return {};
  return {breaking(BreakageCategory::SonameChanged, "SONAME",
                   oc.soname.soname.value_or(""), nc.soname.soname.value_or(""))};
}

std::vector<Breakage> diff_exports(const AbiCorpus &oc, const AbiCorpus &nc) {
  std::vector<Breakage> out;
  for (const ExportedSymbol &e :
       missing_previously_found_exports(oc.exports, nc.exports).missing)
    out.push_back(breaking(BreakageCategory::SymbolRemoved, e.id.to_string(),
                           std::string(to_string(e.sym_type)), ""));
  return out;
}

DiffReport diff_corpora(const AbiCorpus &oc, const AbiCorpus &nc,
                        const DiffOptions &options) {
  DiffReport report;
  bool have_dwarf = oc.has_debug_info && nc.has_debug_info;
  report.mode = have_dwarf && !options.symbols_only ? DiffMode::FullDwarf
                                                    : DiffMode::SymbolsOnly;
  auto &list = report.breakages;
  auto append = [&list](std::vector<Breakage> more) {
    list.insert(list.end(), std::make_move_iterator(more.begin()),
                std::make_move_iterator(more.end()));
  };

  append(diff_soname(oc, nc));
  if (report.mode == DiffMode::FullDwarf) {
    append(diff_functions(oc, nc));
    append(diff_vtables(oc, nc));
    append(diff_enums(oc, nc, options));
    append(diff_globals(oc, nc));
    std::set<std::string> described;
    for (const auto &[name, fn] : oc.functions)
      described.insert(name);
    for (const auto &[name, g] : oc.globals)
      described.insert(g.linkage_name);
    for (Breakage &b : diff_exports(oc, nc)) {
      auto at = b.subject.find('@');
      if (!described.count(b.subject.substr(0, at)))
        list.push_back(std::move(b));
    }
  } else {
    append(diff_exports(oc, nc));
  }
  sort_unique(list);

  bool any_breaking =
      std::any_of(list.begin(), list.end(), [](const Breakage &b) {
        return b.severity == Severity::Breaking;
      });
  if (any_breaking)
    report.verdict = Verdict::Incompatible;
  else if (report.mode == DiffMode::SymbolsOnly && !have_dwarf &&
           !options.symbols_only && !(oc == nc))
    report.verdict = Verdict::Unknown;
  else
    report.verdict = Verdict::Compatible;
  return report;
}

namespace detail {

std::uint64_t unsigned_field(const nlohmann::json &j) {
  if (!j.is_number_unsigned())
    throw Error(ErrorCode::InvalidRecord, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

nlohmann::json report_json(const DiffReport &report) {
  nlohmann::json breakages = nlohmann::json::array();
  for (const Breakage &b : report.breakages)
    breakages.push_back(
        {{"category", to_string(b.category)},
         {"subject", b.subject},
         {"before", b.before},
         {"after", b.after},
         {"severity",
          b.severity == Severity::Breaking ? "breaking" : "informational"}});
  return {{"report_version", 1},
          {"verdict", to_string(report.verdict)},
          {"mode", to_string(report.mode)},
          {"predictor", report.predictor},
          {"elapsed_ns", report.elapsed_ns},
          {"breakages", std::move(breakages)}};
}

DiffReport report_from(const nlohmann::json &j) {
  try {
    if (j.at("report_version").get<int>() != 1)
      throw Error(ErrorCode::InvalidRecord, "unsupported report_version");
    DiffReport r;
    auto verdict = parse_verdict(j.at("verdict").get<std::string>());
    if (!verdict)
      throw Error(ErrorCode::InvalidRecord, "bad verdict");
    r.verdict = *verdict;
    std::string mode = j.at("mode").get<std::string>();
    if (mode != "full_dwarf" && mode != "symbols_only")
      throw Error(ErrorCode::InvalidRecord, "bad mode " + mode);
    r.mode = mode == "full_dwarf" ? DiffMode::FullDwarf : DiffMode::SymbolsOnly;
    r.predictor = j.at("predictor").get<std::string>();
    r.elapsed_ns = unsigned_field(j.at("elapsed_ns"));
    for (const auto &b : j.at("breakages")) {
      auto category = parse_category(b.at("category").get<std::string>());
      if (!category)
        throw Error(ErrorCode::InvalidRecord, "unknown breakage category");
      std::string severity = b.at("severity").get<std::string>();
      if (severity != "breaking" && severity != "informational")
        throw Error(ErrorCode::InvalidRecord, "bad severity " + severity);
      r.breakages.push_back({*category, b.at("subject").get<std::string>(),
                             b.at("before").get<std::string>(),
                             b.at("after").get<std::string>(),
                             severity == "breaking" ? Severity::Breaking
                                                    : Severity::Informational});
    }
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::InvalidRecord, e.what());
  }
}

} // namespace detail

std::string report_to_json(const DiffReport &report, int indent) {
  return detail::report_json(report).dump(indent);
}

DiffReport report_from_json(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::InvalidRecord, "report is not valid JSON");
  return detail::report_from(j);
}

std::string render_report(const DiffReport &report) {
  std::ostringstream os;
  os << "verdict: " << to_string(report.verdict) << " (" << to_string(report.mode)
     << ", " << report.breakages.size() << " finding"
     << (report.breakages.size() == 1 ? "" : "s") << ")\n";
  for (const Breakage &b : report.breakages) {
    os << "  " << to_string(b.category) << ": " << b.subject;
    if (!b.before.empty() || !b.after.empty())
      os << " [" << b.before << " -> " << b.after << "]";
    if (b.severity == Severity::Informational)
      os << " (informational)";
    os << '\n';
  }
  return os.str();
}

} // namespace abirift
