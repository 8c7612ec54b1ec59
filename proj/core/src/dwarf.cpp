// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "dwarf.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>

#include "abirift/error.hpp"
#include "byte_reader.hpp"

namespace abirift::dwarf {

namespace {

using detail::ByteReader;

namespace form {
constexpr std::uint16_t addr = 0x01;
constexpr std::uint16_t block2 = 0x03;
constexpr std::uint16_t block4 = 0x04;
constexpr std::uint16_t data2 = 0x05;
constexpr std::uint16_t data4 = 0x06;
constexpr std::uint16_t data8 = 0x07;
constexpr std::uint16_t string = 0x08;
constexpr std::uint16_t block = 0x09;
constexpr std::uint16_t block1 = 0x0a;
constexpr std::uint16_t data1 = 0x0b;
constexpr std::uint16_t flag = 0x0c;
constexpr std::uint16_t sdata = 0x0d;
constexpr std::uint16_t strp = 0x0e;
constexpr std::uint16_t udata = 0x0f;
constexpr std::uint16_t ref_addr = 0x10;
constexpr std::uint16_t ref1 = 0x11;
constexpr std::uint16_t ref2 = 0x12;
constexpr std::uint16_t ref4 = 0x13;
constexpr std::uint16_t ref8 = 0x14;
constexpr std::uint16_t ref_udata = 0x15;
constexpr std::uint16_t indirect = 0x16;
constexpr std::uint16_t sec_offset = 0x17;
constexpr std::uint16_t exprloc = 0x18;
constexpr std::uint16_t flag_present = 0x19;
constexpr std::uint16_t strx = 0x1a;
constexpr std::uint16_t addrx = 0x1b;
constexpr std::uint16_t ref_sup4 = 0x1c;
constexpr std::uint16_t strp_sup = 0x1d;
constexpr std::uint16_t data16 = 0x1e;
constexpr std::uint16_t line_strp = 0x1f;
constexpr std::uint16_t ref_sig8 = 0x20;
constexpr std::uint16_t implicit_const = 0x21;
constexpr std::uint16_t loclistx = 0x22;
constexpr std::uint16_t rnglistx = 0x23;
constexpr std::uint16_t ref_sup8 = 0x24;
constexpr std::uint16_t strx1 = 0x25;
constexpr std::uint16_t strx2 = 0x26;
constexpr std::uint16_t strx3 = 0x27;
constexpr std::uint16_t strx4 = 0x28;
constexpr std::uint16_t addrx1 = 0x29;
constexpr std::uint16_t addrx2 = 0x2a;
constexpr std::uint16_t addrx3 = 0x2b;
constexpr std::uint16_t addrx4 = 0x2c;
constexpr std::uint16_t gnu_addr_index = 0x1f01;
constexpr std::uint16_t gnu_str_index = 0x1f02;
constexpr std::uint16_t gnu_ref_alt = 0x1f20;
constexpr std::uint16_t gnu_strp_alt = 0x1f21;
} // namespace form

constexpr std::uint8_t ut_type = 0x02;
constexpr std::uint8_t ut_skeleton = 0x04;
constexpr std::uint8_t ut_split_compile = 0x05;
constexpr std::uint8_t ut_split_type = 0x06;

constexpr std::uint64_t lnct_path = 0x1;

struct AttrSpec {
  std::uint16_t name;
  std::uint16_t form;
  std::int64_t implicit_const;
};

struct Abbrev {
  std::uint16_t tag = 0;
  bool has_children = false;
  std::vector<AttrSpec> specs;
};

using AbbrevTable = std::unordered_map<std::uint64_t, Abbrev>;

[[noreturn]] void malformed(const std::string &what) {
  throw Error(ErrorCode::MalformedDwarf, what);
}

AbbrevTable parse_abbrevs(std::span<const std::uint8_t> section,
                          std::uint64_t offset) {
  ByteReader r(section, ErrorCode::MalformedDwarf);
  r.seek(static_cast<std::size_t>(offset));
  AbbrevTable table;
  for (;;) {
    std::uint64_t code = r.uleb();
    if (code == 0)
      break;
    Abbrev a;
    a.tag = static_cast<std::uint16_t>(r.uleb());
    a.has_children = r.u8() != 0;
    for (;;) {
      auto name = static_cast<std::uint16_t>(r.uleb());
      auto f = static_cast<std::uint16_t>(r.uleb());
      std::int64_t ic = 0;
      if (f == form::implicit_const)
        ic = r.sleb();
      if (name == 0 && f == 0)
        break;
      a.specs.push_back({name, f, ic});
    }
    table.emplace(code, std::move(a));
  }
  return table;
}

/// Per-unit state needed while decoding attribute values.
struct UnitContext {
  std::uint64_t offset = 0;
  std::uint16_t version = 0;
  std::uint8_t address_size = 8;
  std::size_t offset_size = 4;
};

struct Sections {
  std::span<const std::uint8_t> info;
  std::span<const std::uint8_t> abbrev;
  std::span<const std::uint8_t> str;
  std::span<const std::uint8_t> line_str;
  std::span<const std::uint8_t> str_offsets;
  std::span<const std::uint8_t> line;
};

bool is_strx(std::uint16_t f) {
  return f == form::strx || f == form::strx1 || f == form::strx2 ||
         f == form::strx3 || f == form::strx4 || f == form::gnu_str_index;
}

AttrValue read_value(ByteReader &r, std::uint16_t f, std::int64_t ic,
                     const UnitContext &u, const Sections &s) {
  AttrValue v;
  v.form = f;
  switch (f) {
  case form::addr:
    v.u = r.fixed(u.address_size);
    break;
  case form::data1:
  case form::ref1:
  case form::flag:
  case form::strx1:
  case form::addrx1:
    v.u = r.u8();
    break;
  case form::data2:
  case form::ref2:
  case form::strx2:
  case form::addrx2:
    v.u = r.u16();
    break;
  case form::strx3:
  case form::addrx3:
    v.u = r.fixed(3);
    break;
  case form::data4:
  case form::ref4:
  case form::ref_sup4:
  case form::strx4:
  case form::addrx4:
    v.u = r.u32();
    break;
  case form::data8:
  case form::ref8:
  case form::ref_sig8:
  case form::ref_sup8:
    v.u = r.u64();
    break;
  case form::data16:
    v.kind = ValueKind::Block;
    v.block = r.bytes(16);
    return v;
  case form::udata:
  case form::ref_udata:
  case form::strx:
  case form::addrx:
  case form::loclistx:
  case form::rnglistx:
  case form::gnu_addr_index:
  case form::gnu_str_index:
    v.u = r.uleb();
    break;
  case form::sdata:
    v.kind = ValueKind::Signed;
    v.s = r.sleb();
    v.u = static_cast<std::uint64_t>(v.s);
    return v;
  case form::implicit_const:
    v.kind = ValueKind::Signed;
    v.s = ic;
    v.u = static_cast<std::uint64_t>(ic);
    return v;
  case form::string:
    v.kind = ValueKind::String;
    v.str = r.cstr();
    return v;
  case form::strp:
  case form::line_strp: {
    std::uint64_t off = r.fixed(u.offset_size);
    auto table = f == form::strp ? s.str : s.line_str;
    if (off >= table.size())
      malformed("string offset out of range");
    v.kind = ValueKind::String;
    v.str = detail::string_at(table, off);
    return v;
  }
  case form::strp_sup:
  case form::gnu_strp_alt:
    r.skip(u.offset_size);
    v.kind = ValueKind::Unresolved;
    return v;
  case form::ref_addr:
    v.u = r.fixed(u.version <= 2 ? u.address_size : u.offset_size);
    v.kind = ValueKind::Reference;
    return v;
  case form::gnu_ref_alt:
    r.skip(u.offset_size);
    v.kind = ValueKind::Unresolved;
    return v;
  case form::sec_offset:
    v.u = r.fixed(u.offset_size);
    break;
  case form::flag_present:
    v.kind = ValueKind::Flag;
    v.u = 1;
    return v;
  case form::block1:
    v.kind = ValueKind::Block;
    v.block = r.bytes(r.u8());
    return v;
  case form::block2:
    v.kind = ValueKind::Block;
    v.block = r.bytes(r.u16());
    return v;
  case form::block4:
    v.kind = ValueKind::Block;
    v.block = r.bytes(r.u32());
    return v;
  case form::block:
  case form::exprloc:
    v.kind = ValueKind::Block;
    v.block = r.bytes(r.uleb());
    return v;
  case form::indirect: {
    auto actual = static_cast<std::uint16_t>(r.uleb());
    if (actual == form::indirect)
      malformed("nested DW_FORM_indirect");
    return read_value(r, actual, ic, u, s);
  }
  default:
    malformed("unknown attribute form 0x" + std::to_string(f));
  }

  switch (f) {
  case form::ref1:
  case form::ref2:
  case form::ref4:
  case form::ref8:
  case form::ref_udata:
    v.kind = ValueKind::Reference;
    v.u += u.offset;
    break;
  case form::ref_sup4:
  case form::ref_sup8:
    v.kind = ValueKind::Unresolved;
    break;
  case form::flag:
    v.kind = ValueKind::Flag;
    break;
  default:
    break;
  }
  return v;
}

std::string base_name_of(std::string_view path) {
  auto slash = path.find_last_of('/');
  return std::string(slash == std::string_view::npos ? path
                                                     : path.substr(slash + 1));
}

/// File names of one line-number program header, indexed the way
/// DW_AT_decl_file indexes them for the header's version.
std::vector<std::string> read_line_files(const Sections &s,
                                         std::uint64_t offset,
                                         std::uint8_t address_size) {
  ByteReader r(s.line, ErrorCode::MalformedDwarf);
  r.seek(static_cast<std::size_t>(offset));
  std::size_t offset_size = 4;
  std::uint64_t length = r.u32();
  if (length == 0xffffffffu) {
    offset_size = 8;
    length = r.u64();
  }
  (void)length;
  std::uint16_t version = r.u16();
  if (version < 2 || version > 5)
    malformed("unsupported line table version " + std::to_string(version));
  if (version >= 5) {
    r.u8(); // address_size
    r.u8(); // segment_selector_size
  }
  r.fixed(offset_size); // header_length
  r.u8();               // minimum_instruction_length
  if (version >= 4)
    r.u8(); // maximum_operations_per_instruction
  r.u8();   // default_is_stmt
  r.u8();   // line_base
  r.u8();   // line_range
  std::uint8_t opcode_base = r.u8();
  if (opcode_base > 0)
    r.skip(opcode_base - 1u);

  std::vector<std::string> files;
  if (version < 5) {
    while (!r.cstr().empty()) {
    }
    files.emplace_back(); // index 0 is not a file before DWARF 5
    for (;;) {
      std::string_view name = r.cstr();
      if (name.empty())
        break;
      r.uleb();
      r.uleb();
      r.uleb();
      files.push_back(base_name_of(name));
    }
    return files;
  }

  UnitContext u;
  u.version = version;
  u.address_size = address_size;
  u.offset_size = offset_size;
  auto read_formats = [&r] {
    std::vector<std::pair<std::uint64_t, std::uint16_t>> formats(r.u8());
    for (auto &[content, f] : formats) {
      content = r.uleb();
      f = static_cast<std::uint16_t>(r.uleb());
    }
    return formats;
  };
  auto dir_formats = read_formats();
  std::uint64_t dir_count = r.uleb();
  for (std::uint64_t i = 0; i < dir_count; ++i)
    for (auto [content, f] : dir_formats)
      read_value(r, f, 0, u, s);
  auto file_formats = read_formats();
  std::uint64_t file_count = r.uleb();
  for (std::uint64_t i = 0; i < file_count; ++i) {
    std::string name;
    for (auto [content, f] : file_formats) {
      AttrValue v = read_value(r, f, 0, u, s);
      if (content == lnct_path && v.kind == ValueKind::String)
        name = base_name_of(v.str);
    }
    files.push_back(std::move(name));
  }
  return files;
}

} // namespace

const AttrValue *DebugInfo::attr(const Die &d, std::uint16_t name) const {
  for (const AttrValue &v : attrs(d))
    if (v.name == name)
      return &v;
  return nullptr;
}

std::optional<std::uint32_t> DebugInfo::at_offset(std::uint64_t offset) const {
  auto it = std::lower_bound(
      dies_.begin(), dies_.end(), offset,
      [](const Die &d, std::uint64_t off) { return d.offset < off; });
  if (it == dies_.end() || it->offset != offset)
    return std::nullopt;
  return static_cast<std::uint32_t>(it - dies_.begin());
}

std::optional<std::uint32_t> DebugInfo::ref(const Die &d,
                                            std::uint16_t name) const {
  const AttrValue *v = attr(d, name);
  if (v == nullptr)
    return std::nullopt;
  if (v->form == form::ref_sig8) {
    auto it = type_signatures_.find(v->u);
    if (it == type_signatures_.end())
      return std::nullopt;
    return it->second;
  }
  if (v->kind != ValueKind::Reference)
    return std::nullopt;
  return at_offset(v->u);
}

std::optional<std::string_view> DebugInfo::string(const Die &d,
                                                  std::uint16_t name) const {
  const AttrValue *v = attr(d, name);
  if (v == nullptr || v->kind != ValueKind::String)
    return std::nullopt;
  return v->str;
}

std::optional<std::uint64_t>
DebugInfo::unsigned_value(const Die &d, std::uint16_t name) const {
  const AttrValue *v = attr(d, name);
  if (v == nullptr ||
      (v->kind != ValueKind::Unsigned && v->kind != ValueKind::Signed))
    return std::nullopt;
  return v->u;
}

bool DebugInfo::flag(const Die &d, std::uint16_t name) const {
  const AttrValue *v = attr(d, name);
  return v != nullptr && v->kind == ValueKind::Flag && v->u != 0;
}

std::int64_t signed_value(const AttrValue &v) {
  if (v.kind == ValueKind::Signed)
    return v.s;
  switch (v.form) {
  case form::data1:
    return static_cast<std::int8_t>(v.u);
  case form::data2:
    return static_cast<std::int16_t>(v.u);
  case form::data4:
    return static_cast<std::int32_t>(v.u);
  default:
    return static_cast<std::int64_t>(v.u);
  }
}

DebugInfo DebugInfo::load(const ElfFile &elf) {
  DebugInfo info;
  info.source_ = elf;

  auto section = [&](std::string_view name) -> std::span<const std::uint8_t> {
    const SectionMeta *meta = elf.find_section(name);
    if (meta == nullptr || !meta->has_file_bytes())
      return {};
    info.sections_.push_back(elf.section_data(*meta));
    return info.sections_.back().bytes();
  };
  Sections s;
  s.info = section(".debug_info");
  s.abbrev = section(".debug_abbrev");
  s.str = section(".debug_str");
  s.line_str = section(".debug_line_str");
  s.str_offsets = section(".debug_str_offsets");
  s.line = section(".debug_line");
  if (s.info.empty())
    malformed("no .debug_info section");

  std::map<std::uint64_t, AbbrevTable> abbrev_cache;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> signatures;

  ByteReader r(s.info, ErrorCode::MalformedDwarf);
  while (!r.at_end()) {
    UnitContext ctx;
    ctx.offset = r.offset();
    std::uint64_t length = r.u32();
    if (length == 0xffffffffu) {
      ctx.offset_size = 8;
      length = r.u64();
    } else if (length >= 0xfffffff0u) {
      malformed("reserved unit length");
    }
    std::size_t end = r.offset() + static_cast<std::size_t>(length);
    if (length > r.remaining())
      malformed("unit extends past .debug_info");

    Unit unit;
    unit.offset = ctx.offset;
    unit.dwarf64 = ctx.offset_size == 8;
    ctx.version = r.u16();
    unit.version = ctx.version;
    if (ctx.version < 4 || ctx.version > 5)
      malformed("unsupported DWARF version " + std::to_string(ctx.version));

    std::uint64_t abbrev_offset = 0;
    std::optional<std::uint64_t> signature;
    std::uint64_t type_offset = 0;
    if (ctx.version == 5) {
      unit.unit_type = r.u8();
      ctx.address_size = r.u8();
      abbrev_offset = r.fixed(ctx.offset_size);
      if (unit.unit_type == ut_skeleton || unit.unit_type == ut_split_compile)
        r.u64();
      if (unit.unit_type == ut_type || unit.unit_type == ut_split_type) {
        signature = r.u64();
        type_offset = r.fixed(ctx.offset_size);
      }
    } else {
      unit.unit_type = 0x01;
      abbrev_offset = r.fixed(ctx.offset_size);
      ctx.address_size = r.u8();
    }
    unit.address_size = ctx.address_size;

    auto cached = abbrev_cache.find(abbrev_offset);
    if (cached == abbrev_cache.end())
      cached = abbrev_cache
                   .emplace(abbrev_offset, parse_abbrevs(s.abbrev, abbrev_offset))
                   .first;
    const AbbrevTable &abbrevs = cached->second;

    auto unit_index = static_cast<std::uint32_t>(info.units_.size());
    std::size_t unit_first_attr = info.attrs_.size();
    std::vector<std::uint32_t> parents;
    ByteReader ur(s.info.first(end), ErrorCode::MalformedDwarf);
    ur.seek(r.offset());
    while (!ur.at_end()) {
      std::uint64_t die_offset = ur.offset();
      std::uint64_t code = ur.uleb();
      if (code == 0) {
        if (!parents.empty())
          parents.pop_back();
        continue;
      }
      auto ab = abbrevs.find(code);
      if (ab == abbrevs.end())
        malformed("unknown abbreviation code");
      Die d;
      d.offset = die_offset;
      d.tag = ab->second.tag;
      d.unit = unit_index;
      d.first_attr = static_cast<std::uint32_t>(info.attrs_.size());
      d.attr_count = static_cast<std::uint32_t>(ab->second.specs.size());
      for (const AttrSpec &spec : ab->second.specs) {
        AttrValue v = read_value(ur, spec.form, spec.implicit_const, ctx, s);
        v.name = spec.name;
        info.attrs_.push_back(v);
      }
      auto index = static_cast<std::uint32_t>(info.dies_.size());
      if (!parents.empty()) {
        d.parent = parents.back();
        info.dies_[parents.back()].children.push_back(index);
      } else if (unit.root == no_index) {
        unit.root = index;
      } else {
        malformed("more than one root DIE in unit");
      }
      info.dies_.push_back(std::move(d));
      if (ab->second.has_children)
        parents.push_back(index);
    }
    r.seek(end);
    if (unit.root == no_index)
      continue;

    const Die &root = info.dies_[unit.root];
    std::uint64_t str_offsets_base = ctx.offset_size == 8 ? 16 : 8;
    if (auto base = info.unsigned_value(root, at::str_offsets_base))
      str_offsets_base = *base;
    for (std::size_t i = unit_first_attr; i < info.attrs_.size(); ++i) {
      AttrValue &v = info.attrs_[i];
      if (!is_strx(v.form))
        continue;
      std::uint64_t at = str_offsets_base + v.u * ctx.offset_size;
      if (at + ctx.offset_size > s.str_offsets.size())
        malformed("string index out of range");
      ByteReader sr(s.str_offsets, ErrorCode::MalformedDwarf);
      sr.seek(static_cast<std::size_t>(at));
      std::uint64_t off = sr.fixed(ctx.offset_size);
      if (off >= s.str.size())
        malformed("string offset out of range");
      v.kind = ValueKind::String;
      v.str = detail::string_at(s.str, off);
    }

    if (auto stmt = info.unsigned_value(root, at::stmt_list);
        stmt && !s.line.empty())
      unit.file_names = read_line_files(s, *stmt, ctx.address_size);
    if (signature)
      signatures.emplace_back(*signature, unit.offset + type_offset);
    info.units_.push_back(std::move(unit));
  }

  for (auto [sig, offset] : signatures)
    if (auto index = info.at_offset(offset))
      info.type_signatures_.emplace(sig, *index);
  return info;
}

} // namespace abirift::dwarf
