// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// The ABI corpus of one binary: exported functions, the types they reach,
/// virtual tables, global variables, the export set and the SONAME, built
/// from DWARF plus the ELF symbol tables.

#ifndef ABIRIFT_CORPUS_HPP
#define ABIRIFT_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "abirift/elf_reader.hpp"
#include "abirift/symbols.hpp"

namespace abirift {

/// Reference to a type inside one corpus. The value is the offset of the
/// describing DIE and is meaningless across corpora.
enum class TypeId : std::uint64_t {};

enum class TypeKind {
  Base,
  Pointer,
  Reference,
  Qualified,
  Typedef,
  StructOrClass,
  Union,
  Enumeration,
  Array,
  FunctionType,
  Unknown,
};

std::string_view to_string(TypeKind kind);

struct MemberField {
  std::string name;
  TypeId type{};
  std::uint64_t byte_offset = 0;
  std::optional<std::uint64_t> bit_offset; ///< bit offset within the storage unit
  std::optional<std::uint64_t> bit_size;

  friend bool operator==(const MemberField &, const MemberField &) = default;
};

struct BaseClass {
  TypeId type{};
  std::uint64_t byte_offset = 0;
  bool is_virtual = false;

  friend bool operator==(const BaseClass &, const BaseClass &) = default;
};

struct Enumerator {
  std::string label;
  std::int64_t value = 0;

  friend bool operator==(const Enumerator &, const Enumerator &) = default;
};

struct TypeDescriptor {
  TypeKind kind = TypeKind::Unknown;
  /// Qualified name for named types, e.g. "outer::inner::Widget".
  std::optional<std::string> name;
  std::optional<std::uint64_t> byte_size;
  std::vector<MemberField> members; ///< sorted by (byte_offset, bit_offset)
  std::vector<BaseClass> base_classes;
  std::vector<Enumerator> enumerators;
  /// Pointee, referee, qualified or aliased type, array element, function
  /// return type. Absent means void.
  std::optional<TypeId> element;
  /// "const", "volatile", "restrict" or "atomic" for Qualified; "&&" marks an
  /// rvalue Reference.
  std::string qualifier;
  /// Array extents, outermost first; absent for unknown bounds.
  std::vector<std::optional<std::uint64_t>> dimensions;
  std::vector<TypeId> parameters; ///< FunctionType only
  bool varargs = false;
  bool declaration_only = false;

  friend bool operator==(const TypeDescriptor &, const TypeDescriptor &) = default;
};

struct FunctionDecl {
  std::string linkage_name;
  std::string display_name; ///< qualified source name, no parameters
  std::vector<TypeId> parameters;
  std::optional<TypeId> return_type; ///< absent means void
  bool is_exported = false;
  std::optional<std::uint64_t> vtable_slot;
  bool is_virtual = false;
  bool varargs = false;
  /// False for exported functions without a DWARF description; their
  /// signature fields are empty and are not compared.
  bool described = true;

  friend bool operator==(const FunctionDecl &, const FunctionDecl &) = default;
};

enum class Linkage { External, Internal };

struct GlobalVar {
  std::string name; ///< qualified source name
  std::string linkage_name;
  TypeId type{};
  Linkage linkage = Linkage::External;
  bool is_exported = false;

  friend bool operator==(const GlobalVar &, const GlobalVar &) = default;
};

struct VTableEntry {
  std::uint64_t slot = 0;
  std::string function; ///< unqualified member function name

  friend bool operator==(const VTableEntry &, const VTableEntry &) = default;
};

struct VTable {
  std::string class_name;
  std::vector<VTableEntry> entries; ///< sorted by slot

  friend bool operator==(const VTable &, const VTable &) = default;
};

struct AbiCorpus {
  std::map<std::string, FunctionDecl> functions; ///< by linkage name
  std::map<TypeId, TypeDescriptor> types;
  std::map<std::string, VTable> vtables; ///< by qualified class name
  std::map<std::string, GlobalVar> globals; ///< by qualified source name
  ExportSet exports;
  SonameInfo soname;
  bool has_debug_info = false;
  /// Set when DWARF was present but unusable and the corpus fell back to
  /// symbols only.
  std::optional<std::string> dwarf_warning;

  friend bool operator==(const AbiCorpus &, const AbiCorpus &) = default;
};

/// Builds the corpus of `elf`. DWARF is read from `debug_path` when given,
/// otherwise from `elf` itself when it embeds .debug_info. Throws
/// DebugInfoMismatch when both files carry build-ids and they differ.
/// Unreadable DWARF does not throw: the corpus keeps exports and SONAME and
/// records the reason in dwarf_warning.
AbiCorpus build_corpus(const ElfFile &elf,
                       const std::optional<std::filesystem::path> &debug_path =
                           std::nullopt);

/// Peels typedefs and cv-qualifiers. Throws DanglingTypeRef when `ref` or
/// any link of the chain is missing from the corpus.
const TypeDescriptor &resolve_type(const AbiCorpus &corpus, TypeId ref);

struct FingerprintOptions {
  unsigned depth_limit = 8;
  /// When false, enumerations contribute only their name and size, so that
  /// enumerator changes are left to the enumerator rules.
  bool include_enumerators = true;
  /// Records, unions and enumerations with these names contribute only their
  /// kind and name, for comparing against a side that has just a declaration.
  std::set<std::string> opaque_records;
};

/// Names of the record, union and enumeration types that are known only by
/// their declaration in `corpus`. Anonymous types all appear as
/// "(anonymous)", the name they carry in fingerprints.
std::set<std::string> declaration_only_records(const AbiCorpus &corpus);

/// Deterministic structural hash (16 hex digits) of the type graph below
/// `ref`. A reference missing from the corpus gets the digest of "?".
std::string type_fingerprint(const AbiCorpus &corpus, TypeId ref,
                             const FingerprintOptions &options = {});

/// C++-style spelling of a type, e.g. "char const*", "S", "int[4]".
std::string type_spelling(const AbiCorpus &corpus, std::optional<TypeId> ref);

/// Canonical JSON document (sorted keys, "corpus_version": 1).
std::string corpus_to_json(const AbiCorpus &corpus, int indent = 2);

/// Export listing ("exports_version": 1) with a demangled form per symbol.
std::string exports_to_json(const ExportSet &exports, int indent = 2);

} // namespace abirift

#endif
