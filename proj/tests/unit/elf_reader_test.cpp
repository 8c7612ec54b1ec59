// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include <elf.h>

#include <cstring>
#include <map>
#include <regex>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "abirift/elf_reader.hpp"
#include "abirift/error.hpp"
#include "test_support.hpp"

namespace abirift {
namespace {

namespace fs = std::filesystem;
using test::capture;
using test::fixture_lib;
using test::quoted;
using test::TempDir;
using test::unit_dir;

std::vector<fs::path> all_fixture_libraries() {
  std::vector<fs::path> out;
  for (const char *name : {"libtypes-gcc5.so", "libtypes-gcc4.so", "libtypes-clang.so",
                           "libtypes-gcc3.so", "libtypes-stripped.so",
                           "libtypes-linked.so", "libtypes-nodebug.so", "exe"})
    out.push_back(unit_dir() / name);
  for (const char *id : {"add_param", "add_param_c", "struct_layout", "enum_value",
                         "soname", "control", "vtable_replace"}) {
    out.push_back(fixture_lib(id, "old"));
    out.push_back(fixture_lib(id, "new"));
  }
  return out;
}

/// (name, offset, size) per section, as printed by readelf -SW.
std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>>
readelf_sections(const fs::path &path) {
  auto text = capture("readelf -SW " + quoted(path));
  std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>> out;
  if (!text)
    return out;
  static const std::regex row(
      R"(^\s*\[\s*(\d+)\]\s+(\S*)\s+\S+\s+[0-9a-f]+\s+([0-9a-f]+)\s+([0-9a-f]+)\s)");
  for (const std::string &line : test::lines(*text)) {
    std::smatch m;
    if (!std::regex_search(line, m, row))
      continue;
    std::string name = m[2];
    if (name == "NULL") // the null section prints its type in the name column
      name.clear();
    out.emplace_back(name, std::stoull(m[3], nullptr, 16),
                     std::stoull(m[4], nullptr, 16));
  }
  return out;
}

/// (name without version, value, size) over .dynsym and .symtab, skipping
/// the null entry of each table.
std::set<std::tuple<std::string, std::uint64_t, std::uint64_t>>
readelf_symbols(const fs::path &path) {
  std::set<std::tuple<std::string, std::uint64_t, std::uint64_t>> out;
  auto text = capture("readelf -sW --dyn-syms " + quoted(path));
  if (!text)
    return out;
  static const std::regex row(
      R"(^\s*(\d+):\s+([0-9a-f]+)\s+(\d+|0x[0-9a-f]+)\s+\S+\s+\S+\s+\S+\s+\S+\s*(\S*))");
  for (const std::string &line : test::lines(*text)) {
    std::smatch m;
    if (!std::regex_search(line, m, row) || m[1] == "0")
      continue;
    std::string name = m[4];
    if (auto at = name.find('@'); at != std::string::npos)
      name.resize(at);
    out.emplace(name, std::stoull(m[2], nullptr, 16), std::stoull(m[3], nullptr, 0));
  }
  return out;
}

class ReadelfOracle : public ::testing::Test {
protected:
  void SetUp() override {
    if (!test::have_tool("readelf"))
      GTEST_SKIP() << "readelf not available";
  }
};

TEST_F(ReadelfOracle, SectionTablesMatch) {
  for (const fs::path &path : all_fixture_libraries()) {
    SCOPED_TRACE(path.string());
    ElfFile elf = open_elf(path);
    auto expected = readelf_sections(path);
    ASSERT_EQ(elf.sections().size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const SectionMeta &s = elf.sections()[i];
      EXPECT_EQ(s.name, std::get<0>(expected[i])) << "section " << i;
      EXPECT_EQ(s.offset, std::get<1>(expected[i])) << s.name;
      EXPECT_EQ(s.size, std::get<2>(expected[i])) << s.name;
    }
  }
}

TEST_F(ReadelfOracle, SymbolsMatch) {
  for (const fs::path &path : all_fixture_libraries()) {
    SCOPED_TRACE(path.string());
    ElfFile elf = open_elf(path);
    std::set<std::tuple<std::string, std::uint64_t, std::uint64_t>> ours;
    for (const RawSymbol &s : read_symbols(elf))
      ours.emplace(s.name, s.value, s.size);
    EXPECT_EQ(ours, readelf_symbols(path));
  }
}

TEST_F(ReadelfOracle, SonameMatches) {
  static const std::regex soname(R"(\(SONAME\)\s+Library soname: \[(.*)\])");
  for (const fs::path &path : all_fixture_libraries()) {
    ElfFile elf = open_elf(path);
    if (elf.file_type() != FileType::SharedObject)
      continue;
    SCOPED_TRACE(path.string());
    auto text = capture("readelf -dW " + quoted(path));
    ASSERT_TRUE(text);
    std::smatch m;
    std::optional<std::string> expected;
    if (std::regex_search(*text, m, soname))
      expected = m[1];
    EXPECT_EQ(read_soname(elf).soname, expected);
  }
}

TEST_F(ReadelfOracle, BuildIdMatches) {
  static const std::regex build_id(R"(Build ID: ([0-9a-f]+))");
  for (const fs::path &path : all_fixture_libraries()) {
    SCOPED_TRACE(path.string());
    auto text = capture("readelf -nW " + quoted(path));
    ASSERT_TRUE(text);
    std::smatch m;
    std::string expected;
    if (std::regex_search(*text, m, build_id))
      expected = m[1];
    EXPECT_EQ(open_elf(path).build_id_hex(), expected);
  }
}

// Values below were read off readelf for the vendored fixtures and frozen.
TEST(ElfReader, FrozenFacts) {
  ElfFile elf = open_elf(unit_dir() / "libtypes-gcc5.so");
  EXPECT_EQ(elf.elf_class(), ElfClass::Elf64);
  EXPECT_EQ(elf.endianness(), Endianness::Little);
  EXPECT_EQ(elf.file_type(), FileType::SharedObject);
  EXPECT_EQ(elf.machine(), EM_X86_64);
  EXPECT_EQ(elf.sections().size(), 37u);
  EXPECT_EQ(elf.build_id_hex(), "763b3b7789df4de2189741d8dd0340bfa470af94");
  EXPECT_EQ(read_soname(elf).soname, "libtypes.so.1");
  EXPECT_TRUE(elf.has_dwarf());
  EXPECT_FALSE(elf.debug_link());

  SymbolTableCounts counts = symbol_table_counts(elf);
  EXPECT_EQ(counts.dynsym, 25u); // readelf: 26 entries including the null one
  EXPECT_EQ(counts.symtab, 46u); // readelf: 47 entries
  EXPECT_LE(counts.merged, counts.dynsym + counts.symtab);

  EXPECT_EQ(open_elf(unit_dir() / "exe").file_type(), FileType::Executable);
  EXPECT_EQ(open_elf(unit_dir() / "libtypes-linked.so").debug_link(),
            "libtypes-linked.so.debug");
}

TEST(ElfReader, VersionedDynamicSymbols) {
  ElfFile elf = open_elf(fixture_lib("soname", "old"));
  bool versioned = false;
  for (const RawSymbol &s : read_symbols(elf))
    if (s.section_index.kind != SectionIndex::Kind::Undefined && s.version)
      versioned = true;
  EXPECT_TRUE(versioned) << "the soname fixture is linked with a version script";

  // A .symtab copy of a versioned dynamic symbol inherits the version, so no
  // defined global name appears both with and without one.
  std::map<std::string, std::set<std::optional<std::string>>> versions;
  for (const RawSymbol &s : read_symbols(elf))
    if (s.binding != SymbolBinding::Local &&
        s.section_index.kind != SectionIndex::Kind::Undefined)
      versions[s.name].insert(s.version);
  for (const auto &[name, set] : versions)
    EXPECT_EQ(set.size(), 1u) << name;
}

TEST(ElfReader, LinkerScriptIsNotElf) {
  fs::path script = unit_dir() / "libc.so";
  EXPECT_TRUE(is_linker_script(script));
  EXPECT_FALSE(is_linker_script(unit_dir() / "libtypes-gcc5.so"));
  try {
    open_elf(script);
    FAIL() << "expected NotElf";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotElf);
  }
}

ErrorCode error_of(const fs::path &path) {
  try {
    ElfFile elf = open_elf(path);
    read_symbols(elf);
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << path;
  return ErrorCode::IoError;
}

std::string fixture_bytes() {
  return test::slurp(unit_dir() / "libtypes-gcc5.so");
}

TEST(ElfReader, RejectsBadInputs) {
  TempDir tmp;
  EXPECT_EQ(error_of(tmp / "missing.so"), ErrorCode::IoError);
  EXPECT_EQ(error_of(unit_dir() / "empty.so"), ErrorCode::NotElf);

  test::write_file(tmp / "text.so", "hello, this is not an object file\n");
  EXPECT_EQ(error_of(tmp / "text.so"), ErrorCode::NotElf);

  std::string bytes = fixture_bytes();
  test::write_file(tmp / "short.so", bytes.substr(0, 40));
  EXPECT_EQ(error_of(tmp / "short.so"), ErrorCode::TruncatedFile);

  // Section headers live at the end of the file.
  test::write_file(tmp / "cut.so", bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(error_of(tmp / "cut.so"), ErrorCode::TruncatedFile);

  std::string big = bytes;
  big[EI_DATA] = ELFDATA2MSB;
  test::write_file(tmp / "big.so", big);
  EXPECT_EQ(error_of(tmp / "big.so"), ErrorCode::UnsupportedLayout);

  std::string odd = bytes;
  odd[EI_CLASS] = 7;
  test::write_file(tmp / "odd.so", odd);
  EXPECT_EQ(error_of(tmp / "odd.so"), ErrorCode::UnsupportedLayout);
}

TEST(ElfReader, MissingSymbolTables) {
  // Turn .symtab and .dynsym into plain PROGBITS.
  std::string bytes = fixture_bytes();
  Elf64_Ehdr eh;
  std::memcpy(&eh, bytes.data(), sizeof eh);
  for (unsigned i = 0; i < eh.e_shnum; ++i) {
    Elf64_Shdr sh;
    std::size_t at = eh.e_shoff + i * eh.e_shentsize;
    std::memcpy(&sh, bytes.data() + at, sizeof sh);
    if (sh.sh_type == SHT_SYMTAB || sh.sh_type == SHT_DYNSYM) {
      sh.sh_type = SHT_PROGBITS;
      std::memcpy(bytes.data() + at, &sh, sizeof sh);
    }
  }
  TempDir tmp;
  test::write_file(tmp / "nosyms.so", bytes);
  EXPECT_EQ(error_of(tmp / "nosyms.so"), ErrorCode::MissingSymbolTables);
}

TEST(ElfReader, SonameRequiresSharedObject) {
  ElfFile exe = open_elf(unit_dir() / "exe");
  try {
    read_soname(exe);
    FAIL() << "expected InputKindError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::InputKindError);
  }
  EXPECT_EQ(read_soname(open_elf(unit_dir() / "libtypes-gcc4.so")).soname,
            std::nullopt);
}

TEST(ElfReader, LocatesDebugInfo) {
  std::vector<fs::path> roots{unit_dir() / "debug"};

  ElfFile embedded = open_elf(unit_dir() / "libtypes-gcc5.so");
  EXPECT_EQ(locate_debug_info(embedded, roots), embedded.path());

  ElfFile stripped = open_elf(unit_dir() / "libtypes-stripped.so");
  EXPECT_FALSE(stripped.has_dwarf());
  auto by_id = locate_debug_info(stripped, roots);
  ASSERT_TRUE(by_id);
  EXPECT_EQ(by_id->parent_path().filename(), "76");
  EXPECT_EQ(by_id->filename(), "3b3b7789df4de2189741d8dd0340bfa470af94.debug");
  EXPECT_EQ(locate_debug_info(stripped, {}), std::nullopt);

  ElfFile linked = open_elf(unit_dir() / "libtypes-linked.so");
  auto by_link = locate_debug_info(linked, roots);
  ASSERT_TRUE(by_link);
  EXPECT_EQ(by_link->filename(), "libtypes-linked.so.debug");

  // Fully stripped, but it keeps the build-id note of the library the
  // build-id debug file was split from.
  ElfFile bare = open_elf(unit_dir() / "libtypes-nodebug.so");
  EXPECT_EQ(locate_debug_info(bare, roots), by_id);
  EXPECT_EQ(locate_debug_info(bare, {}), std::nullopt);
}

TEST(ElfReader, CompressedSectionsInflate) {
  if (!test::have_tool("objcopy"))
    GTEST_SKIP() << "objcopy not available";
  TempDir tmp;
  fs::path plain = unit_dir() / "libtypes-gcc5.so";
  ElfFile reference = open_elf(plain);
  const SectionMeta *info = reference.find_section(".debug_info");
  ASSERT_NE(info, nullptr);
  auto expected = reference.section_data(*info).bytes();

  for (const char *style : {"zlib", "zlib-gnu"}) {
    SCOPED_TRACE(style);
    fs::path out = tmp / (std::string("z-") + style + ".so");
    ASSERT_TRUE(capture(std::string("objcopy --compress-debug-sections=") + style +
                        " " + quoted(plain) + " " + quoted(out)));
    ElfFile packed = open_elf(out);
    const SectionMeta *s = packed.find_section(".debug_info");
    ASSERT_NE(s, nullptr);
    EXPECT_LT(s->size, info->size);
    SectionData owned = packed.section_data(*s);
    auto inflated = owned.bytes();
    ASSERT_EQ(inflated.size(), expected.size());
    EXPECT_TRUE(std::equal(inflated.begin(), inflated.end(), expected.begin()));
    EXPECT_TRUE(packed.has_dwarf());
  }
}

/// Minimal ELF image with a .dynsym, .dynstr, .dynamic (DT_SONAME) and
/// section names, in either class.
template <typename Ehdr, typename Shdr, typename Sym, typename Dyn>
std::string synthetic_elf(unsigned char elf_class) {
  std::string dynstr("\0libsynth.so.3\0alpha\0beta\0", 26);
  std::string shstr("\0.dynsym\0.dynstr\0.dynamic\0.shstrtab\0", 36);
  std::vector<Sym> syms(3);
  std::memset(syms.data(), 0, sizeof(Sym) * syms.size());
  auto info = [](unsigned bind, unsigned type) {
    return static_cast<unsigned char>((bind << 4) | type);
  };
  syms[1].st_name = 15; // alpha
  syms[1].st_value = 0x1000;
  syms[1].st_size = 12;
  syms[1].st_info = info(STB_GLOBAL, STT_FUNC);
  syms[1].st_shndx = 1;
  syms[2].st_name = 21; // beta
  syms[2].st_value = 0x2000;
  syms[2].st_size = 4;
  syms[2].st_info = info(STB_GLOBAL, STT_OBJECT);
  syms[2].st_shndx = 1;
  std::vector<Dyn> dyn(2);
  std::memset(dyn.data(), 0, sizeof(Dyn) * dyn.size());
  dyn[0].d_tag = DT_SONAME;
  dyn[0].d_un.d_val = 1;
  dyn[1].d_tag = DT_NULL;

  std::string body;
  auto place = [&body](const void *p, std::size_t n) {
    std::size_t at = sizeof(Ehdr) + body.size();
    body.append(static_cast<const char *>(p), n);
    while (body.size() % 8)
      body.push_back('\0');
    return at;
  };
  std::size_t sym_at = place(syms.data(), sizeof(Sym) * syms.size());
  std::size_t str_at = place(dynstr.data(), dynstr.size());
  std::size_t dyn_at = place(dyn.data(), sizeof(Dyn) * dyn.size());
  std::size_t shs_at = place(shstr.data(), shstr.size());

  std::vector<Shdr> sh(5);
  std::memset(sh.data(), 0, sizeof(Shdr) * sh.size());
  sh[1] = {};
  sh[1].sh_name = 1;
  sh[1].sh_type = SHT_DYNSYM;
  sh[1].sh_offset = sym_at;
  sh[1].sh_size = sizeof(Sym) * syms.size();
  sh[1].sh_link = 2;
  sh[1].sh_entsize = sizeof(Sym);
  sh[2].sh_name = 9;
  sh[2].sh_type = SHT_STRTAB;
  sh[2].sh_offset = str_at;
  sh[2].sh_size = dynstr.size();
  sh[3].sh_name = 17;
  sh[3].sh_type = SHT_DYNAMIC;
  sh[3].sh_offset = dyn_at;
  sh[3].sh_size = sizeof(Dyn) * dyn.size();
  sh[3].sh_link = 2;
  sh[3].sh_entsize = sizeof(Dyn);
  sh[4].sh_name = 26;
  sh[4].sh_type = SHT_STRTAB;
  sh[4].sh_offset = shs_at;
  sh[4].sh_size = shstr.size();

  Ehdr eh;
  std::memset(&eh, 0, sizeof eh);
  std::memcpy(eh.e_ident, ELFMAG, SELFMAG);
  eh.e_ident[EI_CLASS] = elf_class;
  eh.e_ident[EI_DATA] = ELFDATA2LSB;
  eh.e_ident[EI_VERSION] = EV_CURRENT;
  eh.e_type = ET_DYN;
  eh.e_machine = elf_class == ELFCLASS32 ? EM_386 : EM_X86_64;
  eh.e_version = EV_CURRENT;
  eh.e_ehsize = sizeof(Ehdr);
  eh.e_shoff = sizeof(Ehdr) + body.size();
  eh.e_shentsize = sizeof(Shdr);
  eh.e_shnum = static_cast<std::uint16_t>(sh.size());
  eh.e_shstrndx = 4;

  std::string out(reinterpret_cast<const char *>(&eh), sizeof eh);
  out += body;
  out.append(reinterpret_cast<const char *>(sh.data()), sizeof(Shdr) * sh.size());
  return out;
}

TEST(ElfReader, SyntheticBothClasses) {
  TempDir tmp;
  test::write_file(tmp / "s32.so",
                   synthetic_elf<Elf32_Ehdr, Elf32_Shdr, Elf32_Sym, Elf32_Dyn>(ELFCLASS32));
  test::write_file(tmp / "s64.so",
                   synthetic_elf<Elf64_Ehdr, Elf64_Shdr, Elf64_Sym, Elf64_Dyn>(ELFCLASS64));
  for (const char *name : {"s32.so", "s64.so"}) {
    SCOPED_TRACE(name);
    ElfFile elf = open_elf(tmp / name);
    EXPECT_EQ(elf.elf_class(),
              std::string(name) == "s32.so" ? ElfClass::Elf32 : ElfClass::Elf64);
    EXPECT_EQ(elf.file_type(), FileType::SharedObject);
    EXPECT_EQ(read_soname(elf).soname, "libsynth.so.3");
    auto syms = read_symbols(elf);
    ASSERT_EQ(syms.size(), 2u);
    EXPECT_EQ(syms[0].name, "alpha");
    EXPECT_EQ(syms[0].value, 0x1000u);
    EXPECT_EQ(syms[0].size, 12u);
    EXPECT_EQ(syms[0].sym_type, SymbolType::Func);
    EXPECT_EQ(syms[0].binding, SymbolBinding::Global);
    EXPECT_EQ(syms[1].name, "beta");
    EXPECT_EQ(syms[1].sym_type, SymbolType::Object);
    EXPECT_FALSE(elf.has_dwarf());
  }
}

} // namespace
} // namespace abirift
