// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include <json.hpp>

#include "abirift/corpus.hpp"
#include "abirift/demangle.hpp"
#include "hash.hpp"

namespace abirift {

namespace {

using nlohmann::json;

std::string id_key(TypeId id) {
  return "0x" + detail::hex16(static_cast<std::uint64_t>(id));
}

json optional_id(const std::optional<TypeId> &id) {
  return id ? json(id_key(*id)) : json(nullptr);
}

template <typename T> json optional_value(const std::optional<T> &v) {
  return v ? json(*v) : json(nullptr);
}

json export_json(const ExportedSymbol &e) {
  return {{"name", e.id.name},
          {"version", optional_value(e.id.version)},
          {"size", e.size},
          {"sym_type", to_string(e.sym_type)}};
}

json type_json(const TypeDescriptor &t) {
  json j;
  j["kind"] = to_string(t.kind);
  j["name"] = optional_value(t.name);
  j["byte_size"] = optional_value(t.byte_size);
  j["element"] = optional_id(t.element);
  j["qualifier"] = t.qualifier;
  j["declaration_only"] = t.declaration_only;
  json members = json::array();
  for (const MemberField &m : t.members)
    members.push_back({{"name", m.name},
                       {"type", id_key(m.type)},
                       {"byte_offset", m.byte_offset},
                       {"bit_offset", optional_value(m.bit_offset)},
                       {"bit_size", optional_value(m.bit_size)}});
  j["members"] = std::move(members);
  json bases = json::array();
  for (const BaseClass &b : t.base_classes)
    bases.push_back({{"type", id_key(b.type)},
                     {"byte_offset", b.byte_offset},
                     {"is_virtual", b.is_virtual}});
  j["base_classes"] = std::move(bases);
  json enumerators = json::array();
  for (const Enumerator &e : t.enumerators)
    enumerators.push_back({{"label", e.label}, {"value", e.value}});
  j["enumerators"] = std::move(enumerators);
  json dims = json::array();
  for (const auto &d : t.dimensions)
    dims.push_back(optional_value(d));
  j["dimensions"] = std::move(dims);
  json params = json::array();
  for (TypeId p : t.parameters)
    params.push_back(id_key(p));
  j["parameters"] = std::move(params);
  j["varargs"] = t.varargs;
  return j;
}

} // namespace

std::string corpus_to_json(const AbiCorpus &corpus, int indent) {
  json doc;
  doc["corpus_version"] = 1;
  doc["has_debug_info"] = corpus.has_debug_info;
  doc["dwarf_warning"] = optional_value(corpus.dwarf_warning);
  doc["soname"] = optional_value(corpus.soname.soname);

  json exports = json::array();
  for (const ExportedSymbol &e : corpus.exports)
    exports.push_back(export_json(e));
  doc["exports"] = std::move(exports);

  json functions = json::object();
  for (const auto &[name, fn] : corpus.functions) {
    json params = json::array();
    for (TypeId p : fn.parameters)
      params.push_back(id_key(p));
    functions[name] = {{"linkage_name", fn.linkage_name},
                       {"display_name", fn.display_name},
                       {"parameters", std::move(params)},
                       {"return_type", optional_id(fn.return_type)},
                       {"is_exported", fn.is_exported},
                       {"vtable_slot", optional_value(fn.vtable_slot)},
                       {"is_virtual", fn.is_virtual},
                       {"varargs", fn.varargs},
                       {"described", fn.described}};
  }
  doc["functions"] = std::move(functions);

  json types = json::object();
  for (const auto &[id, t] : corpus.types)
    types[id_key(id)] = type_json(t);
  doc["types"] = std::move(types);

  json vtables = json::object();
  for (const auto &[name, vt] : corpus.vtables) {
    json entries = json::array();
    for (const VTableEntry &e : vt.entries)
      entries.push_back({{"slot", e.slot}, {"function", e.function}});
    vtables[name] = {{"class_name", vt.class_name}, {"entries", std::move(entries)}};
  }
  doc["vtables"] = std::move(vtables);

  json globals = json::object();
  for (const auto &[name, g] : corpus.globals)
    globals[name] = {{"name", g.name},
                     {"linkage_name", g.linkage_name},
                     {"type", id_key(g.type)},
                     {"linkage", g.linkage == Linkage::External ? "external"
                                                                : "internal"},
                     {"is_exported", g.is_exported}};
  doc["globals"] = std::move(globals);

  return doc.dump(indent);
}

std::string exports_to_json(const ExportSet &exports, int indent) {
  json list = json::array();
  for (const ExportedSymbol &e : exports) {
    json j = export_json(e);
    j["demangled"] = display_name(e.id.name);
    list.push_back(std::move(j));
  }
  json doc = {{"exports_version", 1}, {"exports", std::move(list)}};
  return doc.dump(indent);
}

} // namespace abirift
