#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ummi/detail/text.hpp"
#include "ummi/error.hpp"

namespace ummi {

using CategoryCode = std::int32_t;

enum class AttributeKind { Categorical, Continuous };

struct AttributeDecl {
  std::string name;
  AttributeKind kind = AttributeKind::Categorical;
  // Categorical only. The code of a label is its position.
  std::vector<std::string> labels;
  // Continuous only: number of real channels (e.g. 3 for yaw/pitch/roll).
  std::size_t channels = 1;
  std::size_t index = 0;
  // First slot of this attribute inside an AttributeVector.
  std::size_t offset = 0;

  bool categorical() const { return kind == AttributeKind::Categorical; }
  std::size_t cardinality() const { return labels.size(); }
  std::size_t width() const { return categorical() ? 1 : channels; }
};

// Flat storage for one attribute vector y = (y_1, ..., y_M). Categorical
// attributes hold their integer code in one slot; continuous attributes hold
// `channels` consecutive slots. Layout is owned by AttributeSchema.
class AttributeVector {
 public:
  AttributeVector() = default;
  explicit AttributeVector(std::vector<double> slots) : slots_(std::move(slots)) {}

  std::span<const double> slots() const { return slots_; }
  std::span<double> slots() { return slots_; }
  std::size_t slot_count() const { return slots_.size(); }

  friend bool operator==(const AttributeVector&, const AttributeVector&) = default;

 private:
  std::vector<double> slots_;
};

class AttributeSchema {
 public:
  AttributeSchema() = default;

  std::size_t add_categorical(std::string name, std::vector<std::string> labels) {
    if (labels.empty()) throw ConfigError("attribute '" + name + "' declares no categories");
    AttributeDecl d;
    d.name = std::move(name);
    d.kind = AttributeKind::Categorical;
    d.labels = std::move(labels);
    return push(std::move(d));
  }

  // Labels "0".."cardinality-1".
  std::size_t add_categorical(std::string name, std::size_t cardinality) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < cardinality; ++i) labels.push_back(std::to_string(i));
    return add_categorical(std::move(name), std::move(labels));
  }

  std::size_t add_continuous(std::string name, std::size_t channels = 1) {
    if (channels == 0) throw ConfigError("attribute '" + name + "' declares zero channels");
    AttributeDecl d;
    d.name = std::move(name);
    d.kind = AttributeKind::Continuous;
    d.channels = channels;
    return push(std::move(d));
  }

  std::size_t size() const { return decls_.size(); }
  std::size_t slot_count() const { return slots_; }
  const AttributeDecl& operator[](std::size_t k) const { return decls_.at(k); }
  const std::vector<AttributeDecl>& attributes() const { return decls_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    const auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_index(std::string_view name) const {
    if (auto k = index_of(name)) return *k;
    throw ConfigError("unknown attribute '" + std::string(name) + "'");
  }

  std::optional<CategoryCode> code_of(std::size_t k, std::string_view label) const {
    const auto& d = decls_.at(k);
    for (std::size_t i = 0; i < d.labels.size(); ++i)
      if (d.labels[i] == label) return static_cast<CategoryCode>(i);
    return std::nullopt;
  }

  const std::string& label_of(std::size_t k, CategoryCode code) const {
    return decls_.at(k).labels.at(static_cast<std::size_t>(code));
  }

  // Raw slots of attribute k within v.
  std::span<const double> value(const AttributeVector& v, std::size_t k) const {
    const auto& d = decls_.at(k);
    return v.slots().subspan(d.offset, d.width());
  }

  CategoryCode code(const AttributeVector& v, std::size_t k) const {
    return static_cast<CategoryCode>(v.slots()[decls_.at(k).offset]);
  }

  void set_code(AttributeVector& v, std::size_t k, CategoryCode c) const {
    v.slots()[decls_.at(k).offset] = static_cast<double>(c);
  }

  bool same_value(const AttributeVector& u, const AttributeVector& v, std::size_t k) const {
    const auto a = value(u, k);
    const auto b = value(v, k);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

  // Empty string when v conforms, otherwise a description of the first problem.
  std::string conformance_error(const AttributeVector& v) const {
    if (v.slot_count() != slots_) {
      return "vector has " + std::to_string(v.slot_count()) + " slots, schema expects " +
             std::to_string(slots_);
    }
    for (const auto& d : decls_) {
      const auto s = value(v, d.index);
      if (d.categorical()) {
        const double x = s[0];
        if (!(x >= 0) || x != std::floor(x) || x >= static_cast<double>(d.cardinality()))
          return "attribute '" + d.name + "' has invalid category " + detail::format_double(x);
      } else {
        for (const double x : s)
          if (!std::isfinite(x)) return "attribute '" + d.name + "' has a non-finite value";
      }
    }
    return {};
  }

  bool conforms(const AttributeVector& v) const { return conformance_error(v).empty(); }

  friend bool operator==(const AttributeSchema& a, const AttributeSchema& b) {
    if (a.decls_.size() != b.decls_.size()) return false;
    for (std::size_t i = 0; i < a.decls_.size(); ++i) {
      const auto& x = a.decls_[i];
      const auto& y = b.decls_[i];
      if (x.name != y.name || x.kind != y.kind || x.labels != y.labels || x.channels != y.channels)
        return false;
    }
    return true;
  }

 private:
  std::size_t push(AttributeDecl d) {
    if (by_name_.count(d.name)) throw ConfigError("duplicate attribute name '" + d.name + "'");
    if (d.name.empty()) throw ConfigError("attribute name is empty");
    d.index = decls_.size();
    d.offset = slots_;
    slots_ += d.width();
    by_name_.emplace(d.name, d.index);
    decls_.push_back(std::move(d));
    return decls_.back().index;
  }

  std::vector<AttributeDecl> decls_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::size_t slots_ = 0;
};

// Schema text format, one attribute per line in index order:
//
//   shape = categorical(cube, cylinder, sphere, capsule)
//   Male = categorical(2)          # labels "0", "1"
//   pose = continuous(3)
//
// Blank lines and '#' comments are ignored.
inline AttributeSchema parse_schema(std::string_view text) {
  AttributeSchema schema;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto where = "schema line " + std::to_string(lineno) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected '<name> = <kind>(...)'");
    const std::string name(detail::trim(body.substr(0, eq)));
    const auto rhs = detail::trim(body.substr(eq + 1));
    const auto open = rhs.find('(');
    if (open == std::string_view::npos || rhs.back() != ')')
      throw ConfigError(where + "expected '<kind>(...)'");
    const auto kind = detail::trim(rhs.substr(0, open));
    const auto args = rhs.substr(open + 1, rhs.size() - open - 2);
    try {
      if (kind == "categorical") {
        auto parts = detail::split(args, ',');
        if (parts.size() == 1) {
          if (auto n = detail::parse_int(parts[0]); n && *n > 0) {
            schema.add_categorical(name, static_cast<std::size_t>(*n));
            continue;
          }
        }
        for (const auto& p : parts)
          if (p.empty()) throw ConfigError("empty category label");
        schema.add_categorical(name, std::move(parts));
      } else if (kind == "continuous") {
        const auto n = detail::parse_int(args.empty() ? "1" : args);
        if (!n || *n <= 0) throw ConfigError("continuous channel count must be a positive integer");
        schema.add_continuous(name, static_cast<std::size_t>(*n));
      } else {
        throw ConfigError("unknown attribute kind '" + std::string(kind) + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return schema;
}

inline bool has_default_labels(const AttributeDecl& d) {
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i] != std::to_string(i)) return false;
  return true;
}

inline std::string serialize_schema(const AttributeSchema& schema) {
  std::string out;
  for (const auto& d : schema.attributes()) {
    out += d.name + " = ";
    if (d.categorical()) {
      out += "categorical(";
      out += has_default_labels(d) ? std::to_string(d.cardinality()) : detail::join(d.labels, ", ");
      out += ")";
    } else {
      out += "continuous(" + std::to_string(d.channels) + ")";
    }
    out += "\n";
  }
  return out;
}

}  // namespace ummi
