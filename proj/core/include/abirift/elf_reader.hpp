// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// Read-only access to ELF containers: section headers, symbol tables,
/// the dynamic SONAME entry and the build-id / debuglink notes used to find
/// separate debug information.

#ifndef ABIRIFT_ELF_READER_HPP
#define ABIRIFT_ELF_READER_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace abirift {

enum class ElfClass { Elf32, Elf64 };
enum class Endianness { Little, Big };
enum class FileType { SharedObject, Executable, Relocatable, Other };

struct SectionMeta {
  std::string name;
  std::uint32_t type = 0;
  std::uint64_t flags = 0;
  std::uint64_t address = 0;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
  std::uint64_t entry_size = 0;
  std::uint64_t alignment = 0;
  std::uint32_t link = 0;
  std::uint32_t info = 0;

  bool has_file_bytes() const;
};

/// Bytes of one section, either borrowed from the mapping or owned when the
/// section had to be decompressed.
class SectionData {
public:
  SectionData() = default;
  explicit SectionData(std::span<const std::uint8_t> borrowed)
      : bytes_(borrowed) {}
  explicit SectionData(std::vector<std::uint8_t> owned);

  std::span<const std::uint8_t> bytes() const { return bytes_; }
  bool empty() const { return bytes_.empty(); }

private:
  std::shared_ptr<const std::vector<std::uint8_t>> owned_;
  std::span<const std::uint8_t> bytes_;
};

class MappedFile;

/// A parsed ELF container. Immutable after open_elf(); safe to share across
/// threads.
class ElfFile {
public:
  const std::filesystem::path &path() const { return path_; }
  ElfClass elf_class() const { return class_; }
  Endianness endianness() const { return endianness_; }
  FileType file_type() const { return file_type_; }
  std::uint16_t machine() const { return machine_; }
  std::uint64_t size_bytes() const { return size_bytes_; }
  const std::vector<SectionMeta> &sections() const { return sections_; }
  const std::optional<std::vector<std::uint8_t>> &build_id() const {
    return build_id_;
  }
  const std::optional<std::string> &debug_link() const { return debug_link_; }

  /// Lower-case hex rendering of the build-id, empty when there is none.
  std::string build_id_hex() const;

  const SectionMeta *find_section(std::string_view name) const;
  const SectionMeta *section_at(std::size_t index) const;

  /// Section contents, transparently inflating SHF_COMPRESSED sections.
  SectionData section_data(const SectionMeta &section) const;

  /// True when a non-empty .debug_info is present in this file.
  bool has_dwarf() const;

  /// The whole file image.
  std::span<const std::uint8_t> image() const;

private:
  friend ElfFile open_elf(const std::filesystem::path &path);

  std::filesystem::path path_;
  ElfClass class_ = ElfClass::Elf64;
  Endianness endianness_ = Endianness::Little;
  FileType file_type_ = FileType::Other;
  std::uint16_t machine_ = 0;
  std::uint64_t size_bytes_ = 0;
  std::vector<SectionMeta> sections_;
  std::optional<std::vector<std::uint8_t>> build_id_;
  std::optional<std::string> debug_link_;
  std::shared_ptr<const MappedFile> mapping_;
};

enum class SymbolType { Func, Object, Tls, NoType, Other };
enum class SymbolBinding { Local, Global, Weak };
enum class SymbolVisibility { Default, Hidden, Protected, Internal };

struct SectionIndex {
  enum class Kind { Undefined, Absolute, Common, Regular };
  Kind kind = Kind::Undefined;
  std::uint32_t index = 0;

  friend bool operator==(const SectionIndex &, const SectionIndex &) = default;
};

struct RawSymbol {
  std::string name; ///< raw linkage name, never demangled
  std::uint64_t value = 0;
  std::uint64_t size = 0;
  SymbolType sym_type = SymbolType::NoType;
  SymbolBinding binding = SymbolBinding::Local;
  SymbolVisibility visibility = SymbolVisibility::Default;
  SectionIndex section_index;
  std::optional<std::string> version;

  friend bool operator==(const RawSymbol &, const RawSymbol &) = default;
};

struct SonameInfo {
  std::optional<std::string> soname;

  friend bool operator==(const SonameInfo &, const SonameInfo &) = default;
};

/// Entry counts behind read_symbols(), for auditing the merge step.
struct SymbolTableCounts {
  std::size_t symtab = 0;
  std::size_t dynsym = 0;
  std::size_t merged = 0;
};

ElfFile open_elf(const std::filesystem::path &path);

/// Union of .symtab and .dynsym, deduplicated on (name, version, value, size)
/// and sorted by name then value. Throws MissingSymbolTables when the file
/// has neither table.
std::vector<RawSymbol> read_symbols(const ElfFile &elf);

SymbolTableCounts symbol_table_counts(const ElfFile &elf);

/// Throws InputKindError unless the file is a shared object.
SonameInfo read_soname(const ElfFile &elf);

bool is_linker_script(const std::filesystem::path &path);

/// Finds the file holding DWARF for `elf`: the file itself when it embeds
/// .debug_info, otherwise a build-id or debuglink match under search_roots.
std::optional<std::filesystem::path>
locate_debug_info(const ElfFile &elf,
                  std::span<const std::filesystem::path> search_roots);

std::string_view to_string(SymbolType type);
std::string_view to_string(SymbolBinding binding);
std::string_view to_string(FileType type);

} // namespace abirift

#endif
