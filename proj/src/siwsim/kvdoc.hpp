#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "siwsim/errors.hpp"

// Line-oriented key/value documents used for configs, antenna spec files and
// run summaries. Format:
//
//   # comment
//   key = value
//   [section]
//   key = value
//
// Section names may repeat (each occurrence is kept in file order). Keys
// within a section are kept in insertion order so serialization is stable.
namespace siwsim::kvdoc {

class Error : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class Section {
 public:
  Section() = default;
  explicit Section(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  bool has(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  // Typed getters throw Error naming the offending key. The *_or variants
  // return the fallback when the key is absent (but still validate syntax
  // when it is present).
  std::string get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  double get_double_or(std::string_view key, double fallback) const;
  std::int64_t get_int_or(std::string_view key, std::int64_t fallback) const;
  bool get_bool_or(std::string_view key, bool fallback) const;

  // set() replaces the first existing entry or appends.
  void set(std::string_view key, std::string_view value);
  void set_double(std::string_view key, double value);
  void set_int(std::string_view key, std::int64_t value);
  void set_bool(std::string_view key, bool value);

 private:
  std::string name_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

class Document {
 public:
  Section& top() { return top_; }
  const Section& top() const { return top_; }

  std::vector<Section>& sections() { return sections_; }
  const std::vector<Section>& sections() const { return sections_; }

  Section& add_section(std::string name);
  const Section* find_section(std::string_view name) const;
  std::vector<const Section*> find_sections(std::string_view name) const;

  std::string serialize() const;

  // origin is used in error messages only (typically the file path).
  static Document parse(std::string_view text, const std::string& origin = "");
  static Document load(const std::string& path);
  void save(const std::string& path) const;

 private:
  Section top_;
  std::vector<Section> sections_;
};

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double value);

}  // namespace siwsim::kvdoc
