// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/matcher.hpp"

#include <algorithm>
#include <deque>
#include <future>

#include "abirift/elf_reader.hpp"
#include "abirift/error.hpp"

namespace abirift {

namespace fs = std::filesystem;

namespace {

constexpr int max_symlink_hops = 40;

std::string prefix_of(const std::string &name) {
  auto at = name.find(".so");
  return at == std::string::npos ? std::string() : name.substr(0, at);
}

bool ends_with(const std::string &s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string rooted(const fs::path &relative) {
  std::string s = relative.generic_string();
  if (s == ".")
    s.clear();
  return "/" + s;
}

/// Candidate file recorded under a key before ambiguity is decided.
struct Candidate {
  fs::path resolved;
  std::uint64_t size = 0;
};

} // namespace

std::string LibraryKey::to_string() const {
  if (parent_dir.empty() || parent_dir.back() == '/')
    return parent_dir + prefix;
  return parent_dir + "/" + prefix;
}

fs::path resolve_in_root(const fs::path &root, const fs::path &relative) {
  std::vector<std::string> done;
  std::deque<std::string> todo;
  for (const auto &part : relative.relative_path())
    todo.push_back(part.string());
  int hops = 0;
  auto join = [&] {
    fs::path p = root;
    for (const auto &c : done)
      p /= c;
    return p;
  };
  while (!todo.empty()) {
    std::string part = std::move(todo.front());
    todo.pop_front();
    if (part.empty() || part == ".")
      continue;
    if (part == "..") {
      if (!done.empty())
        done.pop_back();
      continue;
    }
    fs::path candidate = join() / part;
    std::error_code ec;
    auto status = fs::symlink_status(candidate, ec);
    if (ec || !fs::exists(status))
      throw Error(ErrorCode::IoError, "dangling path " + candidate.string());
    if (!fs::is_symlink(status)) {
      done.push_back(std::move(part));
      continue;
    }
    if (++hops > max_symlink_hops)
      throw Error(ErrorCode::IoError, "too many symlink hops at " +
                                          candidate.string());
    fs::path target = fs::read_symlink(candidate, ec);
    if (ec)
      throw Error(ErrorCode::IoError, "cannot read link " + candidate.string());
    if (target.is_absolute())
      done.clear();
    std::vector<std::string> parts;
    for (const auto &t : target.relative_path())
      parts.push_back(t.string());
    todo.insert(todo.begin(), parts.begin(), parts.end());
  }
  return join();
}

Enumeration enumerate_libraries(const fs::path &root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw Error(ErrorCode::IoError, "cannot read root " + root.string());

  Enumeration out;
  out.root = root;
  std::vector<fs::path> entries;
  fs::recursive_directory_iterator it(
      root, fs::directory_options::skip_permission_denied, ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot read root " + root.string() + ": " +
                                        ec.message());
  for (fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) {
      out.errors.push_back(root.string() + ": " + ec.message());
      ec.clear();
      continue;
    }
    auto status = it->symlink_status(ec);
    if (ec || fs::is_directory(status))
      continue;
    entries.push_back(it->path());
  }
  std::sort(entries.begin(), entries.end());

  std::map<LibraryKey, std::vector<Candidate>> found;
  for (const fs::path &literal : entries) {
    std::string name = literal.filename().string();
    if (name.find(".so") == std::string::npos || ends_with(name, ".debug"))
      continue;
    fs::path relative = literal.lexically_relative(root);
    try {
      fs::path resolved = resolve_in_root(root, relative);
      if (!fs::is_regular_file(resolved))
        continue;
      if (is_linker_script(resolved)) {
        out.linker_scripts.push_back(relative);
        continue;
      }
      ElfFile elf;
      try {
        elf = open_elf(resolved);
      } catch (const Error &e) {
        if (e.code() == ErrorCode::IoError)
          throw;
        continue; // not an ELF object
      }
      if (elf.file_type() != FileType::SharedObject)
        continue;
      std::string prefix = prefix_of(resolved.filename().string());
      if (prefix.empty())
        prefix = prefix_of(name);
      LibraryKey key{rooted(relative.parent_path()), prefix};
      auto &list = found[key];
      bool seen = std::any_of(list.begin(), list.end(), [&](const Candidate &c) {
        return c.resolved == resolved;
      });
      if (!seen)
        list.push_back({resolved, elf.size_bytes()});
    } catch (const Error &e) {
      out.errors.push_back(relative.generic_string() + ": " + e.what());
    }
  }

  for (auto &[key, list] : found) {
    if (list.size() == 1) {
      out.libraries.emplace(key, LibraryEntry{key, list[0].resolved, list[0].size});
      continue;
    }
    std::vector<fs::path> paths;
    for (const Candidate &c : list)
      paths.push_back(c.resolved);
    std::sort(paths.begin(), paths.end());
    out.ambiguous.emplace(key, std::move(paths));
  }
  return out;
}

MatchResult match_pairs(const Enumeration &old_tree, const Enumeration &new_tree) {
  MatchResult out;
  for (const auto &[key, paths] : old_tree.ambiguous)
    out.ambiguities.push_back({"old", key, paths});
  for (const auto &[key, paths] : new_tree.ambiguous)
    out.ambiguities.push_back({"new", key, paths});

  for (const auto &[key, entry] : old_tree.libraries) {
    if (new_tree.ambiguous.count(key))
      continue;
    auto it = new_tree.libraries.find(key);
    if (it == new_tree.libraries.end()) {
      out.unmatched_old.push_back(key);
      continue;
    }
    const LibraryEntry &other = it->second;
    out.pairs.push_back({key, entry.resolved_path, other.resolved_path,
                         entry.resolved_path.filename() !=
                             other.resolved_path.filename(),
                         entry.size_bytes, other.size_bytes});
  }
  for (const auto &[key, entry] : new_tree.libraries)
    if (!old_tree.ambiguous.count(key) && !old_tree.libraries.count(key))
      out.unmatched_new.push_back(key);

  for (const auto &p : old_tree.linker_scripts)
    out.excluded_linker_scripts.push_back(fs::path("old") / p);
  for (const auto &p : new_tree.linker_scripts)
    out.excluded_linker_scripts.push_back(fs::path("new") / p);
  for (const auto &e : old_tree.errors)
    out.errors.push_back("old: " + e);
  for (const auto &e : new_tree.errors)
    out.errors.push_back("new: " + e);
  return out;
}

MatchResult match_roots(const fs::path &old_root, const fs::path &new_root) {
  auto pending = std::async(std::launch::async, enumerate_libraries, new_root);
  Enumeration old_tree = enumerate_libraries(old_root);
  Enumeration new_tree = pending.get();
  return match_pairs(old_tree, new_tree);
}

} // namespace abirift
