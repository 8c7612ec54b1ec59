// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// ELF container parsing on top of a read-only mapping of the file.

#include "abirift/elf_reader.hpp"

#include <elf.h>
#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <tuple>

#include <zlib.h>

#include "abirift/error.hpp"
#include "byte_reader.hpp"

namespace fs = std::filesystem;

namespace abirift {

using detail::ByteReader;
using detail::string_at;

/// Read-only private mapping of a whole file.
class MappedFile {
public:
  explicit MappedFile(const fs::path &path) {
    int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0)
      throw Error(ErrorCode::IoError,
                  "cannot open " + path.string() + ": " + std::strerror(errno));
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      int err = errno;
      ::close(fd);
      throw Error(ErrorCode::IoError,
                  "cannot stat " + path.string() + ": " + std::strerror(err));
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0 && size_ <= read_limit)
      read_all(fd, path);
    else if (size_ > 0)
      map(fd, path);
    ::close(fd);
  }
  ~MappedFile() {
    if (mapped_)
      ::munmap(const_cast<std::uint8_t *>(data_), size_);
  }
  MappedFile(const MappedFile &) = delete;
  MappedFile &operator=(const MappedFile &) = delete;

  std::span<const std::uint8_t> bytes() const { return {data_, size_}; }

private:
  /// Files up to this size are read into memory; mapping costs more.
  static constexpr std::size_t read_limit = std::size_t{1} << 20;

  void read_all(int fd, const fs::path &path) {
    buffer_.reset(new std::uint8_t[size_]);
    std::size_t done = 0;
    while (done < size_) {
      ssize_t n = ::read(fd, buffer_.get() + done, size_ - done);
      if (n < 0 && errno == EINTR)
        continue;
      if (n <= 0) {
        int err = n < 0 ? errno : EIO;
        ::close(fd);
        throw Error(ErrorCode::IoError,
                    "cannot read " + path.string() + ": " + std::strerror(err));
      }
      done += static_cast<std::size_t>(n);
    }
    data_ = buffer_.get();
  }

  void map(int fd, const fs::path &path) {
    void *p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (p == MAP_FAILED) {
      int err = errno;
      ::close(fd);
      throw Error(ErrorCode::IoError,
                  "cannot map " + path.string() + ": " + std::strerror(err));
    }
    data_ = static_cast<const std::uint8_t *>(p);
    mapped_ = true;
  }

  const std::uint8_t *data_ = nullptr;
  std::size_t size_ = 0;
  std::unique_ptr<std::uint8_t[]> buffer_;
  bool mapped_ = false;
};

bool SectionMeta::has_file_bytes() const {
  return type != SHT_NOBITS && type != SHT_NULL;
}

SectionData::SectionData(std::vector<std::uint8_t> owned)
    : owned_(std::make_shared<const std::vector<std::uint8_t>>(std::move(owned))) {
  bytes_ = *owned_;
}

std::span<const std::uint8_t> ElfFile::image() const {
  return mapping_ ? mapping_->bytes() : std::span<const std::uint8_t>{};
}

std::string ElfFile::build_id_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  if (!build_id_)
    return out;
  for (std::uint8_t b : *build_id_) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

const SectionMeta *ElfFile::find_section(std::string_view name) const {
  for (const auto &s : sections_)
    if (s.name == name)
      return &s;
  // Legacy GNU compression renames .debug_x to .zdebug_x.
  if (name.starts_with(".debug_")) {
    std::string legacy = ".z" + std::string(name.substr(1));
    for (const auto &s : sections_)
      if (s.name == legacy)
        return &s;
  }
  return nullptr;
}

const SectionMeta *ElfFile::section_at(std::size_t index) const {
  return index < sections_.size() ? &sections_[index] : nullptr;
}

namespace {

std::vector<std::uint8_t> inflate_zlib(std::span<const std::uint8_t> input,
                                       std::uint64_t expected_size,
                                       const std::string &what) {
  if (expected_size > (std::uint64_t{1} << 32))
    throw Error(ErrorCode::TruncatedFile, "implausible size for " + what);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(expected_size));
  uLongf out_len = static_cast<uLongf>(out.size());
  int rc = ::uncompress(out.data(), &out_len, input.data(),
                        static_cast<uLong>(input.size()));
  if (rc != Z_OK || out_len != out.size())
    throw Error(ErrorCode::TruncatedFile, "cannot inflate " + what);
  return out;
}

} // namespace

SectionData ElfFile::section_data(const SectionMeta &section) const {
  if (!section.has_file_bytes() || section.size == 0)
    return {};
  auto raw = image().subspan(static_cast<std::size_t>(section.offset),
                             static_cast<std::size_t>(section.size));
  if (section.flags & SHF_COMPRESSED) {
    ByteReader r(raw, ErrorCode::TruncatedFile);
    std::uint32_t ch_type = r.u32();
    std::uint64_t ch_size = 0;
    if (class_ == ElfClass::Elf64) {
      r.u32(); // ch_reserved
      ch_size = r.u64();
      r.u64(); // ch_addralign
    } else {
      ch_size = r.u32();
      r.u32(); // ch_addralign
    }
    if (ch_type != ELFCOMPRESS_ZLIB)
      throw Error(ErrorCode::UnsupportedLayout,
                  "unsupported compression in " + section.name);
    return SectionData(
        inflate_zlib(raw.subspan(r.offset()), ch_size, section.name));
  }
  if (section.name.starts_with(".zdebug_") && raw.size() >= 12 &&
      std::memcmp(raw.data(), "ZLIB", 4) == 0) {
    std::uint64_t size = 0;
    for (int i = 4; i < 12; ++i)
      size = (size << 8) | raw[static_cast<std::size_t>(i)];
    return SectionData(inflate_zlib(raw.subspan(12), size, section.name));
  }
  return SectionData(raw);
}

bool ElfFile::has_dwarf() const {
  const SectionMeta *info = find_section(".debug_info");
  return info != nullptr && info->has_file_bytes() && info->size > 0;
}

namespace {

void parse_notes(std::span<const std::uint8_t> data,
                 std::uint64_t align,
                 std::optional<std::vector<std::uint8_t>> &build_id) {
  ByteReader r(data, ErrorCode::TruncatedFile);
  align = align == 8 ? 8 : 4;
  auto pad = [align](std::uint64_t n) { return (n + align - 1) & ~(align - 1); };
  while (r.remaining() >= 12) {
    std::uint32_t namesz = r.u32();
    std::uint32_t descsz = r.u32();
    std::uint32_t type = r.u32();
    if (pad(namesz) > r.remaining())
      return;
    auto name = r.bytes(pad(namesz));
    if (descsz > r.remaining())
      return;
    auto desc = r.bytes(descsz);
    r.skip(std::min<std::uint64_t>(pad(descsz) - descsz, r.remaining()));
    if (type == NT_GNU_BUILD_ID && namesz == 4 &&
        std::memcmp(name.data(), "GNU", 4) == 0 && !build_id)
      build_id.emplace(desc.begin(), desc.end());
  }
}

FileType file_type_from(std::uint16_t e_type) {
  switch (e_type) {
  case ET_DYN:
    return FileType::SharedObject;
  case ET_EXEC:
    return FileType::Executable;
  case ET_REL:
    return FileType::Relocatable;
  default:
    return FileType::Other;
  }
}

} // namespace

ElfFile open_elf(const fs::path &path) {
  auto mapping = std::make_shared<const MappedFile>(path);
  auto image = mapping->bytes();
  if (image.size() < EI_NIDENT || std::memcmp(image.data(), ELFMAG, SELFMAG) != 0)
    throw Error(ErrorCode::NotElf, path.string() + " is not an ELF object");

  ElfFile elf;
  elf.path_ = path;
  elf.size_bytes_ = image.size();
  elf.mapping_ = mapping;

  switch (image[EI_CLASS]) {
  case ELFCLASS32:
    elf.class_ = ElfClass::Elf32;
    break;
  case ELFCLASS64:
    elf.class_ = ElfClass::Elf64;
    break;
  default:
    throw Error(ErrorCode::UnsupportedLayout,
                path.string() + ": unknown ELF class");
  }
  switch (image[EI_DATA]) {
  case ELFDATA2LSB:
    elf.endianness_ = Endianness::Little;
    break;
  case ELFDATA2MSB:
    elf.endianness_ = Endianness::Big;
    throw Error(ErrorCode::UnsupportedLayout,
                path.string() + ": big-endian ELF is not supported");
  default:
    throw Error(ErrorCode::UnsupportedLayout,
                path.string() + ": unknown ELF data encoding");
  }

  const bool is64 = elf.class_ == ElfClass::Elf64;
  ByteReader r(image, ErrorCode::TruncatedFile);
  r.seek(EI_NIDENT);
  std::uint16_t e_type = r.u16();
  elf.machine_ = r.u16();
  r.u32(); // e_version
  r.fixed(is64 ? 8 : 4); // e_entry
  r.fixed(is64 ? 8 : 4); // e_phoff
  std::uint64_t shoff = r.fixed(is64 ? 8 : 4);
  r.u32(); // e_flags
  r.u16(); // e_ehsize
  r.u16(); // e_phentsize
  r.u16(); // e_phnum
  std::uint16_t shentsize = r.u16();
  std::uint64_t shnum = r.u16();
  std::uint32_t shstrndx = r.u16();
  elf.file_type_ = file_type_from(e_type);

  if (shoff == 0)
    return elf; // no section headers at all

  const std::size_t want_entsize = is64 ? sizeof(Elf64_Shdr) : sizeof(Elf32_Shdr);
  if (shentsize < want_entsize)
    throw Error(ErrorCode::UnsupportedLayout,
                path.string() + ": unexpected section header size");

  auto read_shdr = [&](std::uint64_t index) {
    std::uint64_t at = shoff + index * shentsize;
    if (at > image.size() || image.size() - at < want_entsize)
      throw Error(ErrorCode::TruncatedFile,
                  path.string() + ": section header table out of bounds");
    ByteReader h(image, ErrorCode::TruncatedFile);
    h.seek(static_cast<std::size_t>(at));
    SectionMeta s;
    std::uint32_t name_off = h.u32();
    s.type = h.u32();
    s.flags = h.fixed(is64 ? 8 : 4);
    s.address = h.fixed(is64 ? 8 : 4);
    s.offset = h.fixed(is64 ? 8 : 4);
    s.size = h.fixed(is64 ? 8 : 4);
    s.link = h.u32();
    s.info = h.u32();
    s.alignment = h.fixed(is64 ? 8 : 4);
    s.entry_size = h.fixed(is64 ? 8 : 4);
    return std::pair{s, name_off};
  };

  // Extended numbering keeps the real counts in section 0.
  auto [first, first_name] = read_shdr(0);
  if (shnum == 0)
    shnum = first.size;
  if (shstrndx == SHN_XINDEX)
    shstrndx = first.link;

  if (shnum > (image.size() / shentsize) + 1)
    throw Error(ErrorCode::TruncatedFile,
                path.string() + ": section count exceeds file size");

  std::vector<std::uint32_t> name_offsets;
  elf.sections_.reserve(static_cast<std::size_t>(shnum));
  for (std::uint64_t i = 0; i < shnum; ++i) {
    auto [s, name_off] = read_shdr(i);
    if (s.has_file_bytes() &&
        (s.offset > image.size() || image.size() - s.offset < s.size))
      throw Error(ErrorCode::TruncatedFile,
                  path.string() + ": section " + std::to_string(i) +
                      " extends past end of file");
    elf.sections_.push_back(std::move(s));
    name_offsets.push_back(name_off);
  }

  std::span<const std::uint8_t> shstrtab;
  if (shstrndx < elf.sections_.size() &&
      elf.sections_[shstrndx].has_file_bytes()) {
    const auto &st = elf.sections_[shstrndx];
    shstrtab = image.subspan(static_cast<std::size_t>(st.offset),
                             static_cast<std::size_t>(st.size));
  }
  for (std::size_t i = 0; i < elf.sections_.size(); ++i)
    elf.sections_[i].name = std::string(string_at(shstrtab, name_offsets[i]));

  for (std::size_t i = 0; i < elf.sections_.size(); ++i) {
    const auto &s = elf.sections_[i];
    if (s.type == SHT_NOTE && s.has_file_bytes()) {
      parse_notes(image.subspan(static_cast<std::size_t>(s.offset),
                                static_cast<std::size_t>(s.size)),
                  s.alignment, elf.build_id_);
    } else if (s.name == ".gnu_debuglink" && s.has_file_bytes()) {
      auto link = string_at(image.subspan(static_cast<std::size_t>(s.offset),
                                          static_cast<std::size_t>(s.size)),
                            0);
      if (!link.empty())
        elf.debug_link_ = std::string(link);
    }
  }
  return elf;
}

namespace {

SymbolType symbol_type_from(unsigned char st_type) {
  switch (st_type) {
  case STT_FUNC:
  case STT_GNU_IFUNC:
    return SymbolType::Func;
  case STT_OBJECT:
  case STT_COMMON:
    return SymbolType::Object;
  case STT_TLS:
    return SymbolType::Tls;
  case STT_NOTYPE:
    return SymbolType::NoType;
  default:
    return SymbolType::Other;
  }
}

SymbolBinding binding_from(unsigned char bind) {
  switch (bind) {
  case STB_LOCAL:
    return SymbolBinding::Local;
  case STB_WEAK:
    return SymbolBinding::Weak;
  default:
    return SymbolBinding::Global; // STB_GLOBAL, STB_GNU_UNIQUE
  }
}

SymbolVisibility visibility_from(unsigned char other) {
  switch (other & 0x3) {
  case STV_HIDDEN:
    return SymbolVisibility::Hidden;
  case STV_PROTECTED:
    return SymbolVisibility::Protected;
  case STV_INTERNAL:
    return SymbolVisibility::Internal;
  default:
    return SymbolVisibility::Default;
  }
}

SectionIndex section_index_from(std::uint16_t shndx) {
  switch (shndx) {
  case SHN_UNDEF:
    return {SectionIndex::Kind::Undefined, 0};
  case SHN_ABS:
    return {SectionIndex::Kind::Absolute, 0};
  case SHN_COMMON:
    return {SectionIndex::Kind::Common, 0};
  default:
    return {SectionIndex::Kind::Regular, shndx};
  }
}

std::span<const std::uint8_t> raw_bytes(const ElfFile &elf,
                                        const SectionMeta &s) {
  if (!s.has_file_bytes())
    return {};
  return elf.image().subspan(static_cast<std::size_t>(s.offset),
                             static_cast<std::size_t>(s.size));
}

/// Version index -> version name, from .gnu.version_d and .gnu.version_r.
/// The base definition (the file's own name) maps to nothing.
std::map<std::uint16_t, std::string> version_names(const ElfFile &elf) {
  std::map<std::uint16_t, std::string> names;
  for (const auto &s : elf.sections()) {
    if (s.type != SHT_GNU_verdef && s.type != SHT_GNU_verneed)
      continue;
    const SectionMeta *strtab = elf.section_at(s.link);
    if (strtab == nullptr)
      continue;
    auto strings = raw_bytes(elf, *strtab);
    auto data = raw_bytes(elf, s);
    ByteReader r(data, ErrorCode::TruncatedFile);
    std::uint64_t at = 0;
    // sh_info holds the entry count for both sections.
    for (std::uint32_t n = 0; n < s.info && at < data.size(); ++n) {
      r.seek(static_cast<std::size_t>(at));
      if (s.type == SHT_GNU_verdef) {
        r.u16(); // vd_version
        std::uint16_t flags = r.u16();
        std::uint16_t index = r.u16();
        r.u16(); // vd_cnt
        r.u32(); // vd_hash
        std::uint32_t aux = r.u32();
        std::uint32_t next = r.u32();
        if (!(flags & VER_FLG_BASE)) {
          r.seek(static_cast<std::size_t>(at + aux));
          std::uint32_t name = r.u32();
          names[index] = std::string(string_at(strings, name));
        }
        if (next == 0)
          break;
        at += next;
      } else {
        r.u16(); // vn_version
        std::uint16_t count = r.u16();
        r.u32(); // vn_file
        std::uint32_t aux = r.u32();
        std::uint32_t next = r.u32();
        std::uint64_t aux_at = at + aux;
        for (std::uint16_t k = 0; k < count && aux_at < data.size(); ++k) {
          r.seek(static_cast<std::size_t>(aux_at));
          r.u32(); // vna_hash
          r.u16(); // vna_flags
          std::uint16_t other = r.u16();
          std::uint32_t name = r.u32();
          std::uint32_t aux_next = r.u32();
          names[other] = std::string(string_at(strings, name));
          if (aux_next == 0)
            break;
          aux_at += aux_next;
        }
        if (next == 0)
          break;
        at += next;
      }
    }
  }
  return names;
}

std::vector<RawSymbol> read_table(const ElfFile &elf, const SectionMeta &table,
                                  const std::map<std::uint16_t, std::string> *versions,
                                  std::span<const std::uint8_t> versym) {
  const bool is64 = elf.elf_class() == ElfClass::Elf64;
  const std::size_t entsize = is64 ? sizeof(Elf64_Sym) : sizeof(Elf32_Sym);
  const SectionMeta *strtab = elf.section_at(table.link);
  auto strings = strtab ? raw_bytes(elf, *strtab) : std::span<const std::uint8_t>{};
  auto data = raw_bytes(elf, table);
  std::size_t stride = table.entry_size >= entsize ? table.entry_size : entsize;
  std::size_t count = data.size() / stride;

  std::vector<RawSymbol> out;
  out.reserve(count);
  ByteReader r(data, ErrorCode::TruncatedFile);
  for (std::size_t i = 1; i < count; ++i) {
    r.seek(i * stride);
    std::uint32_t name = r.u32();
    std::uint64_t value = 0, size = 0;
    unsigned char info = 0, other = 0;
    std::uint16_t shndx = 0;
    if (is64) {
      info = r.u8();
      other = r.u8();
      shndx = r.u16();
      value = r.u64();
      size = r.u64();
    } else {
      value = r.u32();
      size = r.u32();
      info = r.u8();
      other = r.u8();
      shndx = r.u16();
    }
    RawSymbol sym;
    sym.name = std::string(string_at(strings, name));
    sym.value = value;
    sym.size = size;
    sym.sym_type = symbol_type_from(ELF64_ST_TYPE(info));
    sym.binding = binding_from(ELF64_ST_BIND(info));
    sym.visibility = visibility_from(other);
    sym.section_index = section_index_from(shndx);

    if (versions != nullptr && (i + 1) * 2 <= versym.size()) {
      std::uint16_t v = static_cast<std::uint16_t>(versym[i * 2] |
                                                   (versym[i * 2 + 1] << 8));
      v &= 0x7fff;
      if (v > VER_NDX_GLOBAL) {
        auto it = versions->find(v);
        if (it != versions->end())
          sym.version = it->second;
      }
    } else if (auto at = sym.name.find('@'); at != std::string::npos && at > 0) {
      std::size_t ver_start = at + 1;
      if (ver_start < sym.name.size() && sym.name[ver_start] == '@')
        ++ver_start;
      std::string version = sym.name.substr(ver_start);
      sym.name.resize(at);
      if (!version.empty())
        sym.version = std::move(version);
    }
    out.push_back(std::move(sym));
  }
  return out;
}

struct Tables {
  std::vector<RawSymbol> dynsym;
  std::vector<RawSymbol> symtab;
  bool any = false;
};

Tables read_tables(const ElfFile &elf) {
  Tables t;
  const SectionMeta *versym_section = nullptr;
  for (const auto &s : elf.sections())
    if (s.type == SHT_GNU_versym)
      versym_section = &s;
  std::map<std::uint16_t, std::string> versions;
  if (versym_section != nullptr)
    versions = version_names(elf);

  for (const auto &s : elf.sections()) {
    if (s.type == SHT_DYNSYM) {
      t.any = true;
      auto versym = versym_section ? raw_bytes(elf, *versym_section)
                                   : std::span<const std::uint8_t>{};
      auto syms = read_table(elf, s, versym_section ? &versions : nullptr, versym);
      t.dynsym.insert(t.dynsym.end(), syms.begin(), syms.end());
    } else if (s.type == SHT_SYMTAB) {
      t.any = true;
      auto syms = read_table(elf, s, nullptr, {});
      t.symtab.insert(t.symtab.end(), syms.begin(), syms.end());
    }
  }
  return t;
}

} // namespace

std::vector<RawSymbol> read_symbols(const ElfFile &elf) {
  Tables t = read_tables(elf);
  if (!t.any)
    throw Error(ErrorCode::MissingSymbolTables,
                elf.path().string() + " has neither .symtab nor .dynsym");

  // .symtab carries no version data; a plain entry that mirrors a versioned
  // dynamic entry is the same symbol and takes its version.
  {
    std::map<std::tuple<std::string_view, std::uint64_t, std::uint64_t>,
             std::string_view>
        dyn_versions;
    for (const auto &s : t.dynsym)
      if (s.version)
        dyn_versions.emplace(std::tuple{std::string_view(s.name), s.value, s.size},
                             std::string_view(*s.version));
    for (auto &s : t.symtab) {
      if (s.version)
        continue;
      auto it = dyn_versions.find({std::string_view(s.name), s.value, s.size});
      if (it != dyn_versions.end())
        s.version = std::string(it->second);
    }
  }

  std::vector<RawSymbol> all = std::move(t.dynsym);
  all.insert(all.end(), std::make_move_iterator(t.symtab.begin()),
             std::make_move_iterator(t.symtab.end()));

  auto key = [](const RawSymbol &s) {
    return std::tie(s.name, s.version, s.value, s.size);
  };
  std::stable_sort(all.begin(), all.end(), [&](const RawSymbol &a, const RawSymbol &b) {
    return std::tie(a.name, a.value, a.version, a.size) <
           std::tie(b.name, b.value, b.version, b.size);
  });
  all.erase(std::unique(all.begin(), all.end(),
                        [&](const RawSymbol &a, const RawSymbol &b) {
                          return key(a) == key(b);
                        }),
            all.end());
  return all;
}

SymbolTableCounts symbol_table_counts(const ElfFile &elf) {
  Tables t = read_tables(elf);
  SymbolTableCounts c;
  c.dynsym = t.dynsym.size();
  c.symtab = t.symtab.size();
  c.merged = t.any ? read_symbols(elf).size() : 0;
  return c;
}

SonameInfo read_soname(const ElfFile &elf) {
  if (elf.file_type() != FileType::SharedObject)
    throw Error(ErrorCode::InputKindError,
                elf.path().string() + " is not a shared object");
  const bool is64 = elf.elf_class() == ElfClass::Elf64;
  for (const auto &s : elf.sections()) {
    if (s.type != SHT_DYNAMIC)
      continue;
    const SectionMeta *strtab = elf.section_at(s.link);
    auto strings = strtab ? raw_bytes(elf, *strtab) : std::span<const std::uint8_t>{};
    ByteReader r(raw_bytes(elf, s), ErrorCode::TruncatedFile);
    const std::size_t entsize = is64 ? 16 : 8;
    while (r.remaining() >= entsize) {
      std::int64_t tag = is64 ? static_cast<std::int64_t>(r.u64())
                              : static_cast<std::int32_t>(r.u32());
      std::uint64_t val = is64 ? r.u64() : r.u32();
      if (tag == DT_NULL)
        break;
      if (tag == DT_SONAME)
        return SonameInfo{std::string(string_at(strings, val))};
    }
  }
  return SonameInfo{};
}

namespace {

bool valid_text(std::span<const std::uint8_t> bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    std::uint8_t c = bytes[i];
    if (c < 0x80) {
      if (c == 0 || (c < 0x20 && c != '\t' && c != '\n' && c != '\r' &&
                     c != '\f' && c != '\v'))
        return false;
      ++i;
      continue;
    }
    std::size_t len = (c & 0xe0) == 0xc0   ? 2
                      : (c & 0xf0) == 0xe0 ? 3
                      : (c & 0xf8) == 0xf0 ? 4
                                           : 0;
    if (len == 0)
      return false;
    if (i + len > bytes.size())
      return true; // sequence cut by the sniff window
    for (std::size_t k = 1; k < len; ++k)
      if ((bytes[i + k] & 0xc0) != 0x80)
        return false;
    i += len;
  }
  return true;
}

} // namespace

bool is_linker_script(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::array<char, 4096> buf{};
  in.read(buf.data(), buf.size());
  auto n = static_cast<std::size_t>(in.gcount());
  std::span<const std::uint8_t> head(reinterpret_cast<const std::uint8_t *>(buf.data()), n);
  if (n == 0)
    return false;
  if (n >= SELFMAG && std::memcmp(head.data(), ELFMAG, SELFMAG) == 0)
    return false;
  if (!valid_text(head))
    return false;

  std::string_view text(buf.data(), n);
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
  };
  skip_space();
  if (text.substr(i, 2) == "/*")
    return true;
  std::size_t start = i;
  while (i < text.size() &&
         (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
    ++i;
  std::string_view token = text.substr(start, i - start);
  return token == "GROUP" || token == "INPUT" || token == "OUTPUT_FORMAT";
}

std::optional<fs::path> locate_debug_info(const ElfFile &elf,
                                          std::span<const fs::path> search_roots) {
  if (elf.has_dwarf())
    return elf.path();

  std::error_code ec;
  auto usable = [&](const fs::path &candidate) {
    return fs::is_regular_file(candidate, ec) &&
           !fs::equivalent(candidate, elf.path(), ec);
  };

  std::string hex = elf.build_id_hex();
  if (hex.size() > 2) {
    for (const auto &root : search_roots) {
      fs::path candidate =
          root / ".build-id" / hex.substr(0, 2) / (hex.substr(2) + ".debug");
      if (usable(candidate))
        return candidate;
    }
  }

  if (const auto &link = elf.debug_link()) {
    fs::path dir = elf.path().parent_path();
    std::vector<fs::path> candidates{dir / *link, dir / ".debug" / *link};
    fs::path absolute_dir = fs::absolute(dir, ec).lexically_normal();
    for (const auto &root : search_roots) {
      candidates.push_back(root / *link);
      candidates.push_back(root / absolute_dir.relative_path() / *link);
    }
    for (const auto &candidate : candidates)
      if (usable(candidate))
        return candidate;
  }
  return std::nullopt;
}

std::string_view to_string(SymbolType type) {
  switch (type) {
  case SymbolType::Func:
    return "func";
  case SymbolType::Object:
    return "object";
  case SymbolType::Tls:
    return "tls";
  case SymbolType::NoType:
    return "notype";
  case SymbolType::Other:
    break;
  }
  return "other";
}

std::string_view to_string(SymbolBinding binding) {
  switch (binding) {
  case SymbolBinding::Local:
    return "local";
  case SymbolBinding::Global:
    return "global";
  case SymbolBinding::Weak:
    break;
  }
  return "weak";
}

std::string_view to_string(FileType type) {
  switch (type) {
  case FileType::SharedObject:
    return "shared_object";
  case FileType::Executable:
    return "executable";
  case FileType::Relocatable:
    return "relocatable";
  case FileType::Other:
    break;
  }
  return "other";
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::NotElf:
    return "NotElf";
  case ErrorCode::TruncatedFile:
    return "TruncatedFile";
  case ErrorCode::UnsupportedLayout:
    return "UnsupportedLayout";
  case ErrorCode::MissingSymbolTables:
    return "MissingSymbolTables";
  case ErrorCode::InputKindError:
    return "InputKindError";
  case ErrorCode::IoError:
    return "IoError";
  case ErrorCode::DebugInfoMismatch:
    return "DebugInfoMismatch";
  case ErrorCode::MalformedDwarf:
    return "MalformedDwarf";
  case ErrorCode::DanglingTypeRef:
    return "DanglingTypeRef";
  case ErrorCode::EmptyStratum:
    return "EmptyStratum";
  case ErrorCode::InvalidRecord:
    break;
  }
  return "InvalidRecord";
}

} // namespace abirift
