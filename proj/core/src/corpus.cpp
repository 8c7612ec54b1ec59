// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/corpus.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "abirift/demangle.hpp"
#include "abirift/error.hpp"
#include "byte_reader.hpp"
#include "dwarf.hpp"

namespace abirift {

namespace {

namespace tag = dwarf::tag;
namespace at = dwarf::at;
using dwarf::Die;
using dwarf::ValueKind;

constexpr std::uint8_t op_constu = 0x10;
constexpr std::uint8_t op_plus_uconst = 0x23;

/// Type ids for references that point outside the loaded DWARF. They live
/// above every real DIE offset.
constexpr std::uint64_t unresolved_id_bit = std::uint64_t{1} << 63;

bool is_record_tag(std::uint16_t t) {
  return t == tag::structure_type || t == tag::class_type ||
         t == tag::union_type;
}

bool is_scope_type_tag(std::uint16_t t) {
  return is_record_tag(t) || t == tag::enumeration_type;
}

/// Struct and class name the same kind of entity; union and enum do not.
int tag_family(std::uint16_t t) {
  switch (t) {
  case tag::union_type:
    return 1;
  case tag::enumeration_type:
    return 2;
  default:
    return 0;
  }
}

std::string_view anonymous_keyword(std::uint16_t t) {
  switch (t) {
  case tag::class_type:
    return "class";
  case tag::union_type:
    return "union";
  case tag::enumeration_type:
    return "enum";
  default:
    return "struct";
  }
}

/// Value of a location that is either a constant or a single
/// DW_OP_plus_uconst / DW_OP_constu expression.
std::optional<std::uint64_t> simple_offset(const dwarf::AttrValue &v) {
  if (v.kind == ValueKind::Unsigned || v.kind == ValueKind::Signed)
    return v.u;
  if (v.kind != ValueKind::Block || v.block.empty())
    return std::nullopt;
  if (v.block[0] != op_plus_uconst && v.block[0] != op_constu)
    return std::nullopt;
  try {
    detail::ByteReader r(v.block.subspan(1), ErrorCode::MalformedDwarf);
    std::uint64_t value = r.uleb();
    if (!r.at_end())
      return std::nullopt;
    return value;
  } catch (const Error &) {
    return std::nullopt;
  }
}

class Extractor {
public:
  Extractor(const dwarf::DebugInfo &info, AbiCorpus &corpus)
      : info_(info), corpus_(corpus) {}

  void run() {
    index_exports();
    index_definitions();
    collect_vtables();
    collect_functions();
    collect_globals();
    drain_types();
  }

private:
  const Die &die(std::uint32_t i) const { return info_.die(i); }

  /// The DIE itself followed by its specification / abstract-origin chain.
  std::vector<std::uint32_t> chain(std::uint32_t index) const {
    std::vector<std::uint32_t> out{index};
    for (int hops = 0; hops < 8; ++hops) {
      const Die &d = die(out.back());
      auto next = info_.ref(d, at::specification);
      if (!next)
        next = info_.ref(d, at::abstract_origin);
      if (!next || std::find(out.begin(), out.end(), *next) != out.end())
        break;
      out.push_back(*next);
    }
    return out;
  }

  std::optional<std::uint32_t> chain_owner(std::uint32_t index,
                                           std::uint16_t name) const {
    for (std::uint32_t i : chain(index))
      if (info_.attr(die(i), name) != nullptr)
        return i;
    return std::nullopt;
  }

  std::optional<std::string_view> chain_string(std::uint32_t index,
                                               std::uint16_t name) const {
    if (auto owner = chain_owner(index, name))
      return info_.string(die(*owner), name);
    return std::nullopt;
  }

  bool chain_flag(std::uint32_t index, std::uint16_t name) const {
    for (std::uint32_t i : chain(index))
      if (info_.flag(die(i), name))
        return true;
    return false;
  }

  std::string synthetic_name(std::uint32_t index) const {
    const Die &d = die(index);
    std::string out = "(anonymous ";
    out += anonymous_keyword(d.tag);
    const auto &files = info_.unit_of(d).file_names;
    auto file = info_.unsigned_value(d, at::decl_file);
    auto line = info_.unsigned_value(d, at::decl_line);
    if (file && *file < files.size() && !files[*file].empty()) {
      out += " at " + files[*file];
      if (line)
        out += ":" + std::to_string(*line);
    }
    out += ")";
    return out;
  }

  /// "ns::Class::" for a DIE nested in namespaces, records or functions.
  std::string scope_prefix(std::uint32_t index) {
    std::uint32_t origin = chain(index).back();
    if (auto hit = scope_cache_.find(origin); hit != scope_cache_.end())
      return hit->second;
    std::string prefix;
    std::uint32_t parent = die(origin).parent;
    while (parent != dwarf::no_index) {
      const Die &p = die(parent);
      if (p.tag == tag::lexical_block) {
        parent = p.parent;
        continue;
      }
      if (p.tag == tag::namespace_ || is_scope_type_tag(p.tag) ||
          p.tag == tag::subprogram)
        prefix = qualified_name(parent) + "::";
      break;
    }
    scope_cache_.emplace(origin, prefix);
    return prefix;
  }

  std::string qualified_name(std::uint32_t index) {
    const Die &d = die(index);
    std::string local;
    if (auto n = chain_string(index, at::name))
      local = std::string(*n);
    else if (d.tag == tag::namespace_)
      local = "(anonymous namespace)";
    else if (is_scope_type_tag(d.tag))
      local = synthetic_name(index);
    return scope_prefix(index) + local;
  }

  void index_exports() {
    for (const ExportedSymbol &e : corpus_.exports) {
      if (e.sym_type == SymbolType::Func)
        exported_functions_.insert(e.id.name);
      else if (e.sym_type == SymbolType::Object || e.sym_type == SymbolType::Tls)
        exported_objects_.insert(e.id.name);
    }
  }

  void index_definitions() {
    const auto &dies = info_.dies();
    for (std::uint32_t i = 0; i < dies.size(); ++i) {
      const Die &d = dies[i];
      if (!is_scope_type_tag(d.tag) || info_.flag(d, at::declaration))
        continue;
      definitions_.emplace(std::make_pair(tag_family(d.tag), qualified_name(i)),
                           i);
    }
  }

  /// Declarations are replaced by the definition of the same name when one
  /// exists anywhere in the file.
  std::uint32_t canonical(std::uint32_t index) {
    const Die &d = die(index);
    if (!is_scope_type_tag(d.tag) || !info_.flag(d, at::declaration))
      return index;
    auto hit = definitions_.find({tag_family(d.tag), qualified_name(index)});
    return hit == definitions_.end() ? index : hit->second;
  }

  /// Type referenced by `owner`'s DW_AT_type; absent means void.
  std::optional<TypeId> type_ref(std::uint32_t owner,
                                 bool strip_top_level_cv = false) {
    const Die &d = die(owner);
    const dwarf::AttrValue *v = info_.attr(d, at::type);
    if (v == nullptr)
      return std::nullopt;
    auto target = info_.ref(d, at::type);
    if (!target) {
      TypeId id{d.offset | unresolved_id_bit};
      if (!corpus_.types.count(id)) {
        TypeDescriptor unknown;
        unknown.name = "(unresolved)";
        corpus_.types.emplace(id, unknown);
      }
      return id;
    }
    std::uint32_t t = *target;
    while (strip_top_level_cv &&
           (die(t).tag == tag::const_type || die(t).tag == tag::volatile_type)) {
      auto next = info_.ref(die(t), at::type);
      if (!next) {
        if (info_.attr(die(t), at::type) == nullptr)
          return std::nullopt; // cv void
        break;
      }
      t = *next;
    }
    t = canonical(t);
    if (queued_.insert(t).second)
      pending_.push_back(t);
    return TypeId{die(t).offset};
  }

  std::optional<TypeId> chain_type(std::uint32_t index,
                                   bool strip_top_level_cv = false) {
    if (auto owner = chain_owner(index, at::type))
      return type_ref(*owner, strip_top_level_cv);
    return std::nullopt;
  }

  void collect_vtables() {
    const auto &dies = info_.dies();
    for (std::uint32_t i = 0; i < dies.size(); ++i) {
      const Die &d = dies[i];
      if ((d.tag != tag::structure_type && d.tag != tag::class_type) ||
          info_.flag(d, at::declaration))
        continue;
      std::vector<std::uint32_t> virtuals;
      std::map<std::uint32_t, std::uint64_t> located;
      for (std::uint32_t c : d.children) {
        const Die &m = die(c);
        if (m.tag != tag::subprogram)
          continue;
        auto virtuality = info_.unsigned_value(m, at::virtuality);
        if (!virtuality || *virtuality == 0)
          continue;
        virtuals.push_back(c);
        const dwarf::AttrValue *loc = info_.attr(m, at::vtable_elem_location);
        if (loc != nullptr)
          if (auto slot = simple_offset(*loc))
            located[c] = *slot;
      }
      if (virtuals.empty())
        continue;
      // Entries without a location take the lowest free slots in declaration
      // order; a virtual destructor fills two (complete and deleting).
      std::set<std::uint64_t> used;
      for (const auto &[c, slot] : located)
        used.insert(slot);
      auto claim = [&used](std::uint64_t width) {
        for (std::uint64_t slot = 0;; ++slot) {
          bool free = true;
          for (std::uint64_t k = 0; k < width && free; ++k)
            free = !used.count(slot + k);
          if (free) {
            for (std::uint64_t k = 0; k < width; ++k)
              used.insert(slot + k);
            return slot;
          }
        }
      };
      VTable table;
      table.class_name = qualified_name(i);
      for (std::uint32_t c : virtuals) {
        const Die &m = die(c);
        auto name = info_.string(m, at::name);
        std::uint64_t slot = 0;
        if (auto it = located.find(c); it != located.end())
          slot = it->second;
        else
          slot = claim(name && name->starts_with("~") ? 2 : 1);
        slots_[c] = slot;
        table.entries.push_back({slot, std::string(name.value_or(""))});
      }
      std::stable_sort(table.entries.begin(), table.entries.end(),
                       [](const VTableEntry &a, const VTableEntry &b) {
                         return a.slot < b.slot;
                       });
      corpus_.vtables.emplace(table.class_name, std::move(table));
    }
  }

  void collect_functions() {
    const auto &dies = info_.dies();
    for (std::uint32_t i = 0; i < dies.size(); ++i) {
      const Die &d = dies[i];
      if (d.tag != tag::subprogram || info_.flag(d, at::declaration))
        continue;
      auto linkage = chain_string(i, at::linkage_name);
      if (!linkage)
        linkage = chain_string(i, at::mips_linkage_name);
      if (!linkage)
        linkage = chain_string(i, at::name);
      if (!linkage || !exported_functions_.count(std::string(*linkage)) ||
          corpus_.functions.count(std::string(*linkage)))
        continue;

      FunctionDecl fn;
      fn.linkage_name = std::string(*linkage);
      fn.display_name = qualified_name(i);
      fn.is_exported = true;
      for (std::uint32_t link : chain(i)) {
        bool has_params = false;
        for (std::uint32_t c : die(link).children) {
          const Die &p = die(c);
          if (p.tag == tag::unspecified_parameters) {
            fn.varargs = true;
            has_params = true;
          }
          if (p.tag != tag::formal_parameter)
            continue;
          has_params = true;
          if (chain_flag(c, at::artificial))
            continue;
          auto type = chain_type(c, true);
          if (type)
            fn.parameters.push_back(*type);
        }
        if (has_params)
          break;
      }
      fn.return_type = chain_type(i);
      for (std::uint32_t link : chain(i)) {
        auto virtuality = info_.unsigned_value(die(link), at::virtuality);
        if (virtuality && *virtuality != 0)
          fn.is_virtual = true;
        if (auto slot = slots_.find(link); slot != slots_.end())
          fn.vtable_slot = slot->second;
      }
      corpus_.functions.emplace(fn.linkage_name, std::move(fn));
    }

    for (const std::string &name : exported_functions_) {
      if (corpus_.functions.count(name))
        continue;
      FunctionDecl fn;
      fn.linkage_name = name;
      auto parsed = demangle(name);
      if (auto *dn = std::get_if<DemangledName>(&parsed))
        fn.display_name = base_name(*dn);
      else
        fn.display_name = name;
      fn.is_exported = true;
      fn.described = false;
      corpus_.functions.emplace(name, std::move(fn));
    }
  }

  bool at_file_scope(std::uint32_t index) const {
    std::uint32_t parent = die(index).parent;
    return parent == dwarf::no_index || die(parent).tag == tag::compile_unit ||
           die(parent).tag == tag::partial_unit ||
           die(parent).tag == tag::namespace_;
  }

  void collect_globals() {
    const auto &dies = info_.dies();
    for (std::uint32_t i = 0; i < dies.size(); ++i) {
      const Die &d = dies[i];
      if (d.tag != tag::variable || info_.flag(d, at::declaration) ||
          !at_file_scope(i) || info_.attr(d, at::location) == nullptr)
        continue;
      auto type = chain_type(i);
      if (!type)
        continue;
      GlobalVar var;
      var.name = qualified_name(i);
      auto linkage = chain_string(i, at::linkage_name);
      if (!linkage)
        linkage = chain_string(i, at::mips_linkage_name);
      if (!linkage)
        linkage = chain_string(i, at::name);
      var.linkage_name = std::string(linkage.value_or(""));
      var.type = *type;
      var.linkage =
          chain_flag(i, at::external) ? Linkage::External : Linkage::Internal;
      var.is_exported = var.linkage == Linkage::External &&
                        exported_objects_.count(var.linkage_name) != 0;
      auto [slot, inserted] = corpus_.globals.emplace(var.name, var);
      if (!inserted && var.is_exported && !slot->second.is_exported)
        slot->second = std::move(var);
    }
  }

  std::optional<std::uint64_t> member_location(const Die &m) const {
    const dwarf::AttrValue *v = info_.attr(m, at::data_member_location);
    if (v == nullptr)
      return std::nullopt;
    return simple_offset(*v);
  }

  void fill_record(std::uint32_t index, TypeDescriptor &t) {
    for (std::uint32_t c : die(index).children) {
      const Die &m = die(c);
      if (m.tag == tag::inheritance) {
        BaseClass base;
        if (auto type = type_ref(c))
          base.type = *type;
        base.byte_offset = member_location(m).value_or(0);
        auto virtuality = info_.unsigned_value(m, at::virtuality);
        base.is_virtual = virtuality && *virtuality != 0;
        t.base_classes.push_back(base);
        continue;
      }
      if (m.tag != tag::member || info_.flag(m, at::declaration) ||
          info_.flag(m, at::external))
        continue;
      MemberField field;
      field.name = std::string(info_.string(m, at::name).value_or(""));
      if (auto type = type_ref(c))
        field.type = *type;
      std::uint64_t location = member_location(m).value_or(0);
      field.byte_offset = location;
      field.bit_size = info_.unsigned_value(m, at::bit_size);
      if (field.bit_size) {
        std::uint64_t bits = location * 8;
        if (auto dbo = info_.unsigned_value(m, at::data_bit_offset)) {
          bits = *dbo;
        } else if (auto legacy = info_.unsigned_value(m, at::bit_offset)) {
          // Counted from the most significant bit of the storage unit.
          std::uint64_t storage = info_.unsigned_value(m, at::byte_size)
                                      .value_or(storage_size(c));
          bits = location * 8 + storage * 8 - *legacy - *field.bit_size;
        }
        field.byte_offset = bits / 8;
        field.bit_offset = bits % 8;
      }
      t.members.push_back(std::move(field));
    }
    std::stable_sort(t.members.begin(), t.members.end(),
                     [](const MemberField &a, const MemberField &b) {
                       return std::pair(a.byte_offset, a.bit_offset.value_or(0)) <
                              std::pair(b.byte_offset, b.bit_offset.value_or(0));
                     });
  }

  std::uint64_t storage_size(std::uint32_t member) const {
    auto t = info_.ref(die(member), at::type);
    for (int hops = 0; t && hops < 16; ++hops) {
      if (auto size = info_.unsigned_value(die(*t), at::byte_size))
        return *size;
      t = info_.ref(die(*t), at::type);
    }
    return 0;
  }

  bool signed_underlying(std::uint32_t index) const {
    auto t = info_.ref(die(index), at::type);
    for (int hops = 0; t && hops < 16; ++hops) {
      const Die &d = die(*t);
      if (d.tag == tag::base_type) {
        auto enc = info_.unsigned_value(d, at::encoding);
        return enc && (*enc == dwarf::encoding::signed_ ||
                       *enc == dwarf::encoding::signed_char);
      }
      t = info_.ref(d, at::type);
    }
    return true;
  }

  void fill_enumeration(std::uint32_t index, TypeDescriptor &t) {
    bool is_signed = signed_underlying(index);
    for (std::uint32_t c : die(index).children) {
      const Die &e = die(c);
      if (e.tag != tag::enumerator)
        continue;
      const dwarf::AttrValue *v = info_.attr(e, at::const_value);
      Enumerator en;
      en.label = std::string(info_.string(e, at::name).value_or(""));
      if (v != nullptr)
        en.value = is_signed || v->kind == ValueKind::Signed
                       ? dwarf::signed_value(*v)
                       : static_cast<std::int64_t>(v->u);
      t.enumerators.push_back(std::move(en));
    }
  }

  void fill_array(std::uint32_t index, TypeDescriptor &t) {
    for (std::uint32_t c : die(index).children) {
      const Die &s = die(c);
      if (s.tag != tag::subrange_type)
        continue;
      std::optional<std::uint64_t> extent;
      if (const auto *count = info_.attr(s, at::count);
          count && count->kind != ValueKind::Reference &&
          count->kind != ValueKind::Block) {
        extent = count->u;
      } else if (const auto *ub = info_.attr(s, at::upper_bound);
                 ub && ub->kind != ValueKind::Reference &&
                 ub->kind != ValueKind::Block) {
        std::int64_t bound = dwarf::signed_value(*ub);
        if (ub->form == 0x0f /* udata */ || bound >= 0)
          extent = ub->u + 1;
      }
      t.dimensions.push_back(extent);
    }
  }

  /// Some producers leave the size of pointers and references implicit.
  void address_sized(TypeDescriptor &t, const Die &d) const {
    if (!t.byte_size)
      t.byte_size = info_.unit_of(d).address_size;
  }

  TypeDescriptor describe(std::uint32_t index) {
    const Die &d = die(index);
    TypeDescriptor t;
    t.byte_size = info_.unsigned_value(d, at::byte_size);
    auto plain_name = info_.string(d, at::name);
    switch (d.tag) {
    case tag::base_type:
    case tag::unspecified_type:
      t.kind = TypeKind::Base;
      if (plain_name)
        t.name = std::string(*plain_name);
      break;
    case tag::pointer_type:
      t.kind = TypeKind::Pointer;
      t.element = type_ref(index);
      address_sized(t, d);
      break;
    case tag::ptr_to_member_type:
      t.kind = TypeKind::Pointer;
      t.qualifier = "::*";
      t.element = type_ref(index);
      break;
    case tag::reference_type:
      t.kind = TypeKind::Reference;
      t.element = type_ref(index);
      address_sized(t, d);
      break;
    case tag::rvalue_reference_type:
      t.kind = TypeKind::Reference;
      t.qualifier = "&&";
      t.element = type_ref(index);
      address_sized(t, d);
      break;
    case tag::const_type:
    case tag::volatile_type:
    case tag::restrict_type:
    case tag::atomic_type:
      t.kind = TypeKind::Qualified;
      t.qualifier = d.tag == tag::const_type      ? "const"
                    : d.tag == tag::volatile_type ? "volatile"
                    : d.tag == tag::restrict_type ? "restrict"
                                                  : "atomic";
      t.element = type_ref(index);
      break;
    case tag::typedef_:
      t.kind = TypeKind::Typedef;
      t.name = qualified_name(index);
      t.element = type_ref(index);
      break;
    case tag::structure_type:
    case tag::class_type:
    case tag::union_type:
      t.kind = d.tag == tag::union_type ? TypeKind::Union
                                        : TypeKind::StructOrClass;
      t.name = qualified_name(index);
      t.declaration_only = info_.flag(d, at::declaration);
      fill_record(index, t);
      break;
    case tag::enumeration_type:
      t.kind = TypeKind::Enumeration;
      t.name = qualified_name(index);
      t.declaration_only = info_.flag(d, at::declaration);
      fill_enumeration(index, t);
      break;
    case tag::array_type:
      t.kind = TypeKind::Array;
      t.element = type_ref(index);
      fill_array(index, t);
      break;
    case tag::subroutine_type:
      t.kind = TypeKind::FunctionType;
      t.element = type_ref(index);
      for (std::uint32_t c : d.children) {
        const Die &p = die(c);
        if (p.tag == tag::unspecified_parameters)
          t.varargs = true;
        else if (p.tag == tag::formal_parameter && !info_.flag(p, at::artificial))
          if (auto type = type_ref(c))
            t.parameters.push_back(*type);
      }
      break;
    default:
      t.kind = TypeKind::Unknown;
      if (plain_name)
        t.name = std::string(*plain_name);
      break;
    }
    return t;
  }

  void drain_types() {
    while (!pending_.empty()) {
      std::uint32_t index = pending_.front();
      pending_.pop_front();
      corpus_.types.insert_or_assign(TypeId{die(index).offset},
                                     describe(index));
    }
  }

  const dwarf::DebugInfo &info_;
  AbiCorpus &corpus_;
  std::set<std::string> exported_functions_;
  std::unordered_set<std::string> exported_objects_;
  std::map<std::pair<int, std::string>, std::uint32_t> definitions_;
  std::unordered_map<std::uint32_t, std::string> scope_cache_;
  std::unordered_map<std::uint32_t, std::uint64_t> slots_;
  std::deque<std::uint32_t> pending_;
  std::unordered_set<std::uint32_t> queued_;
};

} // namespace

std::string_view to_string(TypeKind kind) {
  switch (kind) {
  case TypeKind::Base:
    return "base";
  case TypeKind::Pointer:
    return "pointer";
  case TypeKind::Reference:
    return "reference";
  case TypeKind::Qualified:
    return "qualified";
  case TypeKind::Typedef:
    return "typedef";
  case TypeKind::StructOrClass:
    return "struct_or_class";
  case TypeKind::Union:
    return "union";
  case TypeKind::Enumeration:
    return "enumeration";
  case TypeKind::Array:
    return "array";
  case TypeKind::FunctionType:
    return "function_type";
  case TypeKind::Unknown:
    break;
  }
  return "unknown";
}

AbiCorpus build_corpus(const ElfFile &elf,
                       const std::optional<std::filesystem::path> &debug_path) {
  AbiCorpus corpus;
  if (elf.file_type() == FileType::SharedObject)
    corpus.soname = read_soname(elf);
  try {
    auto symbols = read_symbols(elf);
    corpus.exports = exported(symbols);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::MissingSymbolTables)
      throw;
  }

  std::optional<ElfFile> separate;
  std::error_code ec;
  if (debug_path && !std::filesystem::equivalent(*debug_path, elf.path(), ec)) {
    separate = open_elf(*debug_path);
    if (elf.build_id() && separate->build_id() &&
        *elf.build_id() != *separate->build_id())
      throw Error(ErrorCode::DebugInfoMismatch,
                  debug_path->string() + ": build-id " +
                      separate->build_id_hex() + " does not match " +
                      elf.build_id_hex());
  }
  const ElfFile &dwarf_source = separate ? *separate : elf;
  if (!dwarf_source.has_dwarf())
    return corpus;

  try {
    auto info = dwarf::DebugInfo::load(dwarf_source);
    Extractor(info, corpus).run();
    corpus.has_debug_info = true;
  } catch (const Error &e) {
    if (e.code() != ErrorCode::MalformedDwarf)
      throw;
    corpus.functions.clear();
    corpus.types.clear();
    corpus.vtables.clear();
    corpus.globals.clear();
    corpus.has_debug_info = false;
    corpus.dwarf_warning = e.what();
  }
  return corpus;
}

} // namespace abirift
