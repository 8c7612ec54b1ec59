// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// Internal DWARF 4/5 reader: decodes .debug_info into an in-memory DIE tree
/// with attribute values already resolved to strings, constants and
/// section-relative references.

#ifndef ABIRIFT_DWARF_HPP
#define ABIRIFT_DWARF_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "abirift/elf_reader.hpp"

namespace abirift::dwarf {

// Tags, attributes and forms used by the reader. Values from the DWARF 5
// standard, tables 7.3, 7.5.4 and 7.6.
namespace tag {
constexpr std::uint16_t array_type = 0x01;
constexpr std::uint16_t class_type = 0x02;
constexpr std::uint16_t enumeration_type = 0x04;
constexpr std::uint16_t formal_parameter = 0x05;
constexpr std::uint16_t lexical_block = 0x0b;
constexpr std::uint16_t member = 0x0d;
constexpr std::uint16_t pointer_type = 0x0f;
constexpr std::uint16_t reference_type = 0x10;
constexpr std::uint16_t compile_unit = 0x11;
constexpr std::uint16_t structure_type = 0x13;
constexpr std::uint16_t subroutine_type = 0x15;
constexpr std::uint16_t typedef_ = 0x16;
constexpr std::uint16_t union_type = 0x17;
constexpr std::uint16_t unspecified_parameters = 0x18;
constexpr std::uint16_t inheritance = 0x1c;
constexpr std::uint16_t ptr_to_member_type = 0x1f;
constexpr std::uint16_t subrange_type = 0x21;
constexpr std::uint16_t base_type = 0x24;
constexpr std::uint16_t const_type = 0x26;
constexpr std::uint16_t enumerator = 0x28;
constexpr std::uint16_t subprogram = 0x2e;
constexpr std::uint16_t variable = 0x34;
constexpr std::uint16_t volatile_type = 0x35;
constexpr std::uint16_t restrict_type = 0x37;
constexpr std::uint16_t namespace_ = 0x39;
constexpr std::uint16_t unspecified_type = 0x3b;
constexpr std::uint16_t partial_unit = 0x3c;
constexpr std::uint16_t rvalue_reference_type = 0x42;
constexpr std::uint16_t type_unit = 0x41;
constexpr std::uint16_t atomic_type = 0x47;
} // namespace tag

namespace at {
constexpr std::uint16_t sibling = 0x01;
constexpr std::uint16_t location = 0x02;
constexpr std::uint16_t name = 0x03;
constexpr std::uint16_t byte_size = 0x0b;
constexpr std::uint16_t bit_offset = 0x0c;
constexpr std::uint16_t bit_size = 0x0d;
constexpr std::uint16_t stmt_list = 0x10;
constexpr std::uint16_t low_pc = 0x11;
constexpr std::uint16_t high_pc = 0x12;
constexpr std::uint16_t const_value = 0x1c;
constexpr std::uint16_t upper_bound = 0x2f;
constexpr std::uint16_t abstract_origin = 0x31;
constexpr std::uint16_t count = 0x37;
constexpr std::uint16_t data_member_location = 0x38;
constexpr std::uint16_t decl_file = 0x3a;
constexpr std::uint16_t decl_line = 0x3b;
constexpr std::uint16_t declaration = 0x3c;
constexpr std::uint16_t encoding = 0x3e;
constexpr std::uint16_t external = 0x3f;
constexpr std::uint16_t specification = 0x47;
constexpr std::uint16_t type = 0x49;
constexpr std::uint16_t virtuality = 0x4c;
constexpr std::uint16_t vtable_elem_location = 0x4d;
constexpr std::uint16_t ranges = 0x55;
constexpr std::uint16_t artificial = 0x34;
constexpr std::uint16_t entry_pc = 0x52;
constexpr std::uint16_t data_bit_offset = 0x6b;
constexpr std::uint16_t linkage_name = 0x6e;
constexpr std::uint16_t enum_class = 0x6d;
constexpr std::uint16_t str_offsets_base = 0x72;
constexpr std::uint16_t mips_linkage_name = 0x2007;
} // namespace at

namespace encoding {
constexpr std::uint64_t signed_ = 0x05;
constexpr std::uint64_t signed_char = 0x06;
} // namespace encoding

enum class ValueKind : std::uint8_t {
  Unsigned, ///< addresses, data forms, udata, sec_offset, indices
  Signed,   ///< sdata and implicit_const
  String,
  Reference, ///< absolute .debug_info offset
  Block,     ///< block and exprloc forms
  Flag,
  Unresolved, ///< references into files we do not read (dwz alt files)
};

struct AttrValue {
  std::uint16_t name = 0;
  std::uint16_t form = 0;
  ValueKind kind = ValueKind::Unsigned;
  std::uint64_t u = 0;
  std::int64_t s = 0;
  std::string_view str;
  std::span<const std::uint8_t> block;
};

/// Constant value with fixed-size data forms sign-extended from their width.
std::int64_t signed_value(const AttrValue &v);

constexpr std::uint32_t no_index = 0xffffffffu;

struct Die {
  std::uint64_t offset = 0;
  std::uint16_t tag = 0;
  std::uint32_t unit = 0;
  std::uint32_t parent = no_index;
  std::uint32_t first_attr = 0;
  std::uint32_t attr_count = 0;
  std::vector<std::uint32_t> children;
};

struct Unit {
  std::uint64_t offset = 0;
  std::uint16_t version = 0;
  std::uint8_t unit_type = 0;
  std::uint8_t address_size = 8;
  bool dwarf64 = false;
  std::uint32_t root = no_index;
  /// Indexed by DW_AT_decl_file. Entry 0 is the primary file in DWARF 5 and
  /// a placeholder in DWARF 4.
  std::vector<std::string> file_names;
};

/// All DIEs of one ELF file's .debug_info.
class DebugInfo {
public:
  /// Throws Error(MalformedDwarf) on unsupported versions or corrupt data.
  static DebugInfo load(const ElfFile &elf);

  const std::vector<Die> &dies() const { return dies_; }
  const std::vector<Unit> &units() const { return units_; }
  const Die &die(std::uint32_t index) const { return dies_[index]; }
  const Unit &unit_of(const Die &d) const { return units_[d.unit]; }

  std::span<const AttrValue> attrs(const Die &d) const {
    return {attrs_.data() + d.first_attr, d.attr_count};
  }
  const AttrValue *attr(const Die &d, std::uint16_t name) const;

  /// DIE index at an absolute .debug_info offset.
  std::optional<std::uint32_t> at_offset(std::uint64_t offset) const;

  /// Target of a reference attribute, including type-unit signatures.
  std::optional<std::uint32_t> ref(const Die &d, std::uint16_t name) const;

  std::optional<std::string_view> string(const Die &d, std::uint16_t name) const;
  std::optional<std::uint64_t> unsigned_value(const Die &d, std::uint16_t name) const;
  bool flag(const Die &d, std::uint16_t name) const;

private:
  ElfFile source_;
  std::vector<SectionData> sections_;
  std::vector<Die> dies_;
  std::vector<AttrValue> attrs_;
  std::vector<Unit> units_;
  std::unordered_map<std::uint64_t, std::uint32_t> type_signatures_;
};

} // namespace abirift::dwarf

#endif
