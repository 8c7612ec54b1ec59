// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "abirift/corpus.hpp"
#include "abirift/error.hpp"
#include "hash.hpp"

namespace abirift {

namespace {

std::string id_text(TypeId id) {
  return "0x" + detail::hex16(static_cast<std::uint64_t>(id));
}

const TypeDescriptor &lookup(const AbiCorpus &corpus, TypeId ref) {
  auto it = corpus.types.find(ref);
  if (it == corpus.types.end())
    throw Error(ErrorCode::DanglingTypeRef, "no type " + id_text(ref));
  return it->second;
}

bool is_synthetic(const std::optional<std::string> &name) {
  return name && name->find("(anonymous ") != std::string::npos;
}

/// Name as it enters fingerprints. Synthetic names carry a source location
/// that moves with unrelated edits, so anonymous types hash by shape only.
std::string stable_name(const TypeDescriptor &t) {
  if (!t.name)
    return "";
  if (is_synthetic(t.name))
    return "(anonymous)";
  return *t.name;
}

class Fingerprinter {
public:
  Fingerprinter(const AbiCorpus &corpus, const FingerprintOptions &options)
      : corpus_(corpus), options_(options) {}

  std::string hash(std::optional<TypeId> ref, unsigned depth) {
    if (!ref)
      return "void";
    auto it = corpus_.types.find(*ref);
    if (it == corpus_.types.end())
      return "?";
    const TypeDescriptor &t = it->second;
    if (depth > options_.depth_limit)
      return "name:" + std::string(to_string(t.kind)) + ":" + stable_name(t);
    if (on_path_.count(*ref))
      return "cycle:" + std::string(to_string(t.kind)) + ":" + stable_name(t);
    auto key = std::make_pair(*ref, depth);
    if (auto hit = memo_.find(key); hit != memo_.end())
      return hit->second;

    on_path_.insert(*ref);
    std::string text = opaque(t) ? "opaque|" + std::string(to_string(t.kind)) +
                                       "|" + stable_name(t)
                                 : describe(t, depth);
    on_path_.erase(*ref);
    std::string digest = detail::hex16(detail::fnv1a(text));
    memo_.emplace(key, digest);
    return digest;
  }

private:
  bool opaque(const TypeDescriptor &t) const {
    return (t.kind == TypeKind::StructOrClass || t.kind == TypeKind::Union ||
            t.kind == TypeKind::Enumeration) &&
           t.name && options_.opaque_records.count(stable_name(t));
  }

  std::string describe(const TypeDescriptor &t, unsigned depth) {
    std::string s(to_string(t.kind));
    s += '|';
    s += stable_name(t);
    s += '|';
    if (t.byte_size)
      s += std::to_string(*t.byte_size);
    s += '|';
    s += t.qualifier;
    s += '|';
    switch (t.kind) {
    case TypeKind::Typedef:
    case TypeKind::Qualified:
      s += hash(t.element, depth);
      break;
    case TypeKind::Pointer:
    case TypeKind::Reference:
      s += hash(t.element, depth + 1);
      break;
    case TypeKind::Array:
      for (const auto &d : t.dimensions)
        s += "[" + (d ? std::to_string(*d) : std::string()) + "]";
      s += hash(t.element, depth + 1);
      break;
    case TypeKind::FunctionType:
      s += "ret=" + hash(t.element, depth + 1);
      for (TypeId p : t.parameters)
        s += ",p=" + hash(p, depth + 1);
      if (t.varargs)
        s += ",...";
      break;
    case TypeKind::StructOrClass:
    case TypeKind::Union: {
      for (const BaseClass &b : t.base_classes)
        s += "base(" + std::to_string(b.byte_offset) + (b.is_virtual ? "v" : "") +
             "," + hash(b.type, depth + 1) + ")";
      std::vector<std::string> members;
      for (const MemberField &m : t.members) {
        std::string ms = "m(" + m.name + "," + std::to_string(m.byte_offset);
        if (m.bit_size)
          ms += ":" + std::to_string(m.bit_offset.value_or(0)) + ":" +
                std::to_string(*m.bit_size);
        ms += "," + hash(m.type, depth + 1) + ")";
        members.push_back(std::move(ms));
      }
      if (t.kind == TypeKind::Union)
        std::sort(members.begin(), members.end());
      for (const std::string &m : members)
        s += m;
      if (t.declaration_only)
        s += "decl";
      break;
    }
    case TypeKind::Enumeration:
      if (options_.include_enumerators)
        for (const Enumerator &e : t.enumerators)
          s += e.label + "=" + std::to_string(e.value) + ";";
      break;
    case TypeKind::Base:
    case TypeKind::Unknown:
      break;
    }
    return s;
  }

  const AbiCorpus &corpus_;
  const FingerprintOptions &options_;
  std::set<TypeId> on_path_;
  std::map<std::pair<TypeId, unsigned>, std::string> memo_;
};

std::string spell(const AbiCorpus &corpus, std::optional<TypeId> ref,
                  int budget) {
  if (!ref)
    return "void";
  auto it = corpus.types.find(*ref);
  if (it == corpus.types.end())
    return "?";
  const TypeDescriptor &t = it->second;
  if (budget <= 0)
    return t.name.value_or("...");
  switch (t.kind) {
  case TypeKind::Pointer: {
    auto target = t.element ? corpus.types.find(*t.element) : corpus.types.end();
    if (target != corpus.types.end() &&
        target->second.kind == TypeKind::FunctionType) {
      const TypeDescriptor &fn = target->second;
      std::string s = spell(corpus, fn.element, budget - 1) + " (*)(";
      for (std::size_t i = 0; i < fn.parameters.size(); ++i)
        s += (i ? ", " : "") + spell(corpus, fn.parameters[i], budget - 1);
      if (fn.varargs)
        s += fn.parameters.empty() ? "..." : ", ...";
      return s + ")";
    }
    if (t.qualifier == "::*")
      return spell(corpus, t.element, budget - 1) + " ::*";
    return spell(corpus, t.element, budget - 1) + "*";
  }
  case TypeKind::Reference:
    return spell(corpus, t.element, budget - 1) +
           (t.qualifier == "&&" ? "&&" : "&");
  case TypeKind::Qualified:
    return spell(corpus, t.element, budget - 1) + " " + t.qualifier;
  case TypeKind::Array: {
    std::string s = spell(corpus, t.element, budget - 1);
    for (const auto &d : t.dimensions)
      s += "[" + (d ? std::to_string(*d) : std::string()) + "]";
    return s;
  }
  case TypeKind::FunctionType: {
    std::string s = spell(corpus, t.element, budget - 1) + " (";
    for (std::size_t i = 0; i < t.parameters.size(); ++i)
      s += (i ? ", " : "") + spell(corpus, t.parameters[i], budget - 1);
    return s + ")";
  }
  default:
    return t.name.value_or("(unnamed " + std::string(to_string(t.kind)) + ")");
  }
}

} // namespace

const TypeDescriptor &resolve_type(const AbiCorpus &corpus, TypeId ref) {
  const TypeDescriptor *t = &lookup(corpus, ref);
  std::set<TypeId> seen{ref};
  while ((t->kind == TypeKind::Typedef || t->kind == TypeKind::Qualified) &&
         t->element) {
    if (!seen.insert(*t->element).second)
      break;
    t = &lookup(corpus, *t->element);
  }
  return *t;
}

std::string type_fingerprint(const AbiCorpus &corpus, TypeId ref,
                             const FingerprintOptions &options) {
  std::string digest = Fingerprinter(corpus, options).hash(ref, 0);
  if (digest.size() != 16)
    digest = detail::hex16(detail::fnv1a(digest));
  return digest;
}

std::set<std::string> declaration_only_records(const AbiCorpus &corpus) {
  std::set<std::string> out;
  for (const auto &[id, t] : corpus.types)
    if (t.declaration_only && t.name &&
        (t.kind == TypeKind::StructOrClass || t.kind == TypeKind::Union ||
         t.kind == TypeKind::Enumeration))
      out.insert(stable_name(t));
  return out;
}

std::string type_spelling(const AbiCorpus &corpus, std::optional<TypeId> ref) {
  return spell(corpus, ref, 32);
}

} // namespace abirift
