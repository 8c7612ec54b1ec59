// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#include "abirift/demangle.hpp"

#include <cstddef>
#include <optional>

namespace abirift {

namespace {

constexpr int max_depth = 64;

/// Recursive-descent parser over the supported grammar subset. Every method
/// returns nullopt/false on anything it does not recognize.
class Parser {
public:
  explicit Parser(std::string_view in) : in_(in) {}

  std::optional<DemangledName> parse() {
    if (!consume("_Z"))
      return std::nullopt;
    DemangledName out;
    if (!name(out))
      return std::nullopt;
    if (!bare_function_type(out.parameter_types))
      return std::nullopt;
    if (pos_ != in_.size())
      return std::nullopt;
    return out;
  }

private:
  bool at_end() const { return pos_ >= in_.size(); }
  char peek() const { return at_end() ? '\0' : in_[pos_]; }
  bool consume(std::string_view s) {
    if (in_.substr(pos_, s.size()) != s)
      return false;
    pos_ += s.size();
    return true;
  }

  std::optional<std::string> source_name() {
    if (at_end() || peek() < '1' || peek() > '9')
      return std::nullopt;
    std::size_t len = 0;
    while (!at_end() && peek() >= '0' && peek() <= '9') {
      len = len * 10 + static_cast<std::size_t>(peek() - '0');
      ++pos_;
      if (len > in_.size())
        return std::nullopt;
    }
    if (len > in_.size() - pos_)
      return std::nullopt;
    std::string_view id = in_.substr(pos_, len);
    for (char c : id) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '_' || c == '$' || c == '.';
      if (!ok)
        return std::nullopt;
    }
    pos_ += len;
    if (id.starts_with("_GLOBAL__N"))
      return std::string("(anonymous namespace)");
    return std::string(id);
  }

  bool name(DemangledName &out) {
    if (peek() == 'N') {
      ++pos_;
      // cv-qualifiers of the implicit object parameter
      if (consume("r") || consume("V"))
        return false;
      if (consume("K"))
        out.const_method = true;
      if (peek() == 'R' || peek() == 'O')
        return false;
      if (!nested_components(out.qualified_name, true))
        return false;
      return true;
    }
    auto id = source_name();
    if (!id)
      return false;
    out.qualified_name.push_back(std::move(*id));
    return true;
  }

  /// Components up to and including the closing 'E'.
  bool nested_components(std::vector<std::string> &components,
                         bool allow_ctor_dtor) {
    while (!at_end() && peek() != 'E') {
      if (allow_ctor_dtor && (peek() == 'C' || peek() == 'D')) {
        char kind = peek();
        ++pos_;
        char variant = peek();
        bool valid = kind == 'C' ? (variant >= '1' && variant <= '3')
                                 : (variant >= '0' && variant <= '2');
        if (!valid || components.empty())
          return false;
        ++pos_;
        std::string cls = components.back();
        components.push_back(kind == 'C' ? cls : "~" + cls);
        continue;
      }
      auto id = source_name();
      if (!id)
        return false;
      components.push_back(std::move(*id));
    }
    if (!consume("E") || components.empty())
      return false;
    return true;
  }

  bool bare_function_type(std::vector<std::string> &params) {
    if (at_end())
      return false;
    if (peek() == 'v' && pos_ + 1 == in_.size()) {
      ++pos_;
      return true;
    }
    while (!at_end()) {
      auto t = type(0);
      if (!t || *t == "void")
        return false;
      params.push_back(std::move(*t));
    }
    return true;
  }

  static const char *builtin(char c) {
    switch (c) {
    case 'v': return "void";
    case 'b': return "bool";
    case 'c': return "char";
    case 'a': return "signed char";
    case 'h': return "unsigned char";
    case 's': return "short";
    case 't': return "unsigned short";
    case 'i': return "int";
    case 'j': return "unsigned int";
    case 'l': return "long";
    case 'm': return "unsigned long";
    case 'x': return "long long";
    case 'y': return "unsigned long long";
    case 'n': return "__int128";
    case 'o': return "unsigned __int128";
    case 'f': return "float";
    case 'd': return "double";
    case 'e': return "long double";
    case 'w': return "wchar_t";
    case 'z': return "...";
    default: return nullptr;
    }
  }

  std::optional<std::string> type(int depth) {
    if (depth > max_depth || at_end())
      return std::nullopt;
    char c = peek();
    if (const char *b = builtin(c)) {
      ++pos_;
      return std::string(b);
    }
    // Wraps the next type. References cannot be qualified, pointed to or
    // referenced, and cv-qualifiers appear once each in "VK" order.
    auto wrap = [&](const char *suffix) -> std::optional<std::string> {
      ++pos_;
      if ((c == 'K' && (peek() == 'K' || peek() == 'V')) || (c == 'V' && peek() == 'V'))
        return std::nullopt;
      auto inner = type(depth + 1);
      if (!inner || *inner == "..." || inner->ends_with('&'))
        return std::nullopt;
      return *inner + suffix;
    };
    switch (c) {
    case 'P':
      return wrap("*");
    case 'R':
      return wrap("&");
    case 'O':
      return wrap("&&");
    case 'K':
      return wrap(" const");
    case 'V':
      return wrap(" volatile");
    case 'N': {
      ++pos_;
      std::vector<std::string> parts;
      if (peek() == 'K' || peek() == 'V' || peek() == 'r')
        return std::nullopt;
      if (!nested_components(parts, false))
        return std::nullopt;
      std::string joined;
      for (const auto &p : parts) {
        if (!joined.empty())
          joined += "::";
        joined += p;
      }
      return joined;
    }
    default:
      break;
    }
    if (c >= '1' && c <= '9')
      return source_name();
    return std::nullopt;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

} // namespace

std::string DemangledName::render() const {
  std::string out = base_name(*this);
  out += '(';
  for (std::size_t i = 0; i < parameter_types.size(); ++i) {
    if (i > 0)
      out += ", ";
    out += parameter_types[i];
  }
  out += ')';
  if (const_method)
    out += " const";
  return out;
}

DemangleResult demangle(std::string_view raw) {
  if (auto parsed = Parser(raw).parse()) {
    parsed->raw = std::string(raw);
    return std::move(*parsed);
  }
  return Unparsed{std::string(raw)};
}

std::string base_name(const DemangledName &name) {
  std::string out;
  for (const auto &component : name.qualified_name) {
    if (!out.empty())
      out += "::";
    out += component;
  }
  return out;
}

std::string display_name(std::string_view raw) {
  auto result = demangle(raw);
  if (const auto *d = std::get_if<DemangledName>(&result))
    return d->render();
  return std::string(raw);
}

const std::string &raw_of(const DemangleResult &result) {
  return std::visit([](const auto &v) -> const std::string & { return v.raw; },
                    result);
}

} // namespace abirift
