#include "siwsim/kvdoc.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace siwsim::kvdoc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  std::ostringstream os;
  if (!origin.empty()) {
    os << origin << ":" << line << ": ";
  } else {
    os << "line " << line << ": ";
  }
  os << what;
  throw Error(os.str());
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    throw RuntimeFailure("number formatting failed");
  }
  return std::string(buf, end);
}

bool Section::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> Section::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Section::get(std::string_view key) const {
  auto v = find(key);
  if (!v) {
    throw Error("missing key '" + std::string(key) + "'" +
                (name_.empty() ? "" : " in section [" + name_ + "]"));
  }
  return *v;
}

namespace {

double parse_double(std::string_view key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE ||
      !std::isfinite(v)) {
    throw Error("key '" + std::string(key) + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE) {
    throw Error("key '" + std::string(key) + "': expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error("key '" + std::string(key) + "': expected true/false, got '" + text + "'");
}

}  // namespace

double Section::get_double(std::string_view key) const {
  return parse_double(key, get(key));
}

std::int64_t Section::get_int(std::string_view key) const {
  return parse_int(key, get(key));
}

bool Section::get_bool(std::string_view key) const {
  return parse_bool(key, get(key));
}

std::string Section::get_or(std::string_view key, std::string fallback) const {
  auto v = find(key);
  return v ? *v : std::move(fallback);
}

double Section::get_double_or(std::string_view key, double fallback) const {
  auto v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

std::int64_t Section::get_int_or(std::string_view key, std::int64_t fallback) const {
  auto v = find(key);
  return v ? parse_int(key, *v) : fallback;
}

bool Section::get_bool_or(std::string_view key, bool fallback) const {
  auto v = find(key);
  return v ? parse_bool(key, *v) : fallback;
}

void Section::set(std::string_view key, std::string_view value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::string(value);
      return;
    }
  }
  entries_.emplace_back(std::string(key), std::string(value));
}

void Section::set_double(std::string_view key, double value) {
  set(key, format_double(value));
}

void Section::set_int(std::string_view key, std::int64_t value) {
  set(key, std::to_string(value));
}

void Section::set_bool(std::string_view key, bool value) {
  set(key, value ? "true" : "false");
}

Section& Document::add_section(std::string name) {
  return sections_.emplace_back(std::move(name));
}

const Section* Document::find_section(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name() == name) return &s;
  }
  return nullptr;
}

std::vector<const Section*> Document::find_sections(std::string_view name) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_) {
    if (s.name() == name) out.push_back(&s);
  }
  return out;
}

std::string Document::serialize() const {
  std::ostringstream os;
  auto emit = [&os](const Section& s) {
    for (const auto& [k, v] : s.entries()) {
      os << k << " = " << v << "\n";
    }
  };
  emit(top_);
  for (const auto& s : sections_) {
    if (!top_.entries().empty() || &s != &sections_.front()) {
      os << "\n";
    }
    os << "[" << s.name() << "]\n";
    emit(s);
  }
  return os.str();
}

Document Document::parse(std::string_view text, const std::string& origin) {
  Document doc;
  Section* current = &doc.top_;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail(origin, line_no, "malformed section header '" + std::string(line) + "'");
      }
      current = &doc.add_section(std::string(trim(line.substr(1, line.size() - 2))));
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(origin, line_no, "expected 'key = value', got '" + std::string(line) + "'");
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail(origin, line_no, "empty key");
    }
    current->set(key, value);
  }
  return doc;
}

Document Document::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Document::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw RuntimeFailure("cannot write '" + path + "'");
  }
  out << serialize();
  if (!out) {
    throw RuntimeFailure("write failed for '" + path + "'");
  }
}

}  // namespace siwsim::kvdoc
