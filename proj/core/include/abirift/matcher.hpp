// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// Pairing of shared libraries across two system trees by parent directory
/// and file-name prefix, after resolving symlinks inside each tree.

#ifndef ABIRIFT_MATCHER_HPP
#define ABIRIFT_MATCHER_HPP

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace abirift {

struct LibraryKey {
  std::string parent_dir; ///< relative to the root, with a leading '/'
  std::string prefix;     ///< file name up to the first ".so"

  friend auto operator<=>(const LibraryKey &, const LibraryKey &) = default;
  friend bool operator==(const LibraryKey &, const LibraryKey &) = default;

  /// "parent_dir/prefix".
  std::string to_string() const;
};

struct LibraryEntry {
  LibraryKey key;
  std::filesystem::path resolved_path; ///< regular file inside the root
  std::uint64_t size_bytes = 0;

  friend bool operator==(const LibraryEntry &, const LibraryEntry &) = default;
};

struct Ambiguity {
  std::string side; ///< "old" or "new"
  LibraryKey key;
  std::vector<std::filesystem::path> candidates; ///< distinct resolved files

  friend bool operator==(const Ambiguity &, const Ambiguity &) = default;
};

struct Enumeration {
  std::filesystem::path root;
  std::map<LibraryKey, LibraryEntry> libraries; ///< unambiguous keys only
  std::map<LibraryKey, std::vector<std::filesystem::path>> ambiguous;
  std::vector<std::filesystem::path> linker_scripts; ///< literal paths
  std::vector<std::string> errors;
};

/// Walks `root` in sorted order. Throws IoError when the root itself cannot
/// be read; problems with individual entries land in `errors`.
Enumeration enumerate_libraries(const std::filesystem::path &root);

/// Resolves `relative` against `root`, following symlinks with absolute
/// targets interpreted inside the root. Throws IoError on dangling links and
/// loops.
std::filesystem::path resolve_in_root(const std::filesystem::path &root,
                                      const std::filesystem::path &relative);

struct MatchedPair {
  LibraryKey key;
  std::filesystem::path old_path;
  std::filesystem::path new_path;
  bool filename_changed = false;
  std::uint64_t old_size_bytes = 0;
  std::uint64_t new_size_bytes = 0;

  friend bool operator==(const MatchedPair &, const MatchedPair &) = default;
};

struct MatchResult {
  std::vector<MatchedPair> pairs; ///< sorted by key
  std::vector<LibraryKey> unmatched_old;
  std::vector<LibraryKey> unmatched_new;
  std::vector<Ambiguity> ambiguities;
  std::vector<std::filesystem::path> excluded_linker_scripts;
  std::vector<std::string> errors;
};

MatchResult match_pairs(const Enumeration &old_tree, const Enumeration &new_tree);

/// Enumerates both roots concurrently and matches them.
MatchResult match_roots(const std::filesystem::path &old_root,
                        const std::filesystem::path &new_root);

} // namespace abirift

#endif
