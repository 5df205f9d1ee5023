#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ummi/detail/text.hpp"
#include "ummi/error.hpp"
#include "ummi/schema.hpp"

namespace ummi {

enum class Domain { A, B };
enum class Direction { A2B, B2A };
enum class Role { DomainSplitting, Shared, SpecificA, SpecificB };

constexpr Domain source_of(Direction d) { return d == Direction::A2B ? Domain::A : Domain::B; }
constexpr Domain target_of(Direction d) { return d == Direction::A2B ? Domain::B : Domain::A; }
constexpr Domain other(Domain d) { return d == Domain::A ? Domain::B : Domain::A; }

constexpr std::string_view to_string(Domain d) { return d == Domain::A ? "A" : "B"; }
constexpr std::string_view to_string(Direction d) { return d == Direction::A2B ? "A2B" : "B2A"; }

constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::DomainSplitting: return "domain-splitting";
    case Role::Shared: return "shared";
    case Role::SpecificA: return "specific-A";
    case Role::SpecificB: return "specific-B";
  }
  return "?";
}

// The role of an attribute that varies only within domain d.
constexpr Role specific_role(Domain d) { return d == Domain::A ? Role::SpecificA : Role::SpecificB; }

struct SplitValues {
  CategoryCode a = 0;  // q^A
  CategoryCode b = 0;  // q^B
};

// {z_d} ⊔ Z_c ⊔ Z_s^A ⊔ Z_s^B with the values that pin each domain.
struct AttributePartition {
  std::optional<std::size_t> domain_splitting;
  std::optional<SplitValues> split_values;
  std::vector<std::size_t> shared;
  std::vector<std::size_t> specific_a;
  std::vector<std::size_t> specific_b;
  std::map<std::size_t, CategoryCode> fixed_in_a;  // t^A, keyed by Z_s^B
  std::map<std::size_t, CategoryCode> fixed_in_b;  // t^B, keyed by Z_s^A

  const std::vector<std::size_t>& specific(Domain d) const {
    return d == Domain::A ? specific_a : specific_b;
  }
  // Attributes pinned in domain d and their values (t^d).
  const std::map<std::size_t, CategoryCode>& fixed_in(Domain d) const {
    return d == Domain::A ? fixed_in_a : fixed_in_b;
  }
  std::optional<CategoryCode> split_value(Domain d) const {
    if (!split_values) return std::nullopt;
    return d == Domain::A ? split_values->a : split_values->b;
  }

  friend bool operator==(const AttributePartition&, const AttributePartition&) = default;
};

struct Violation {
  std::optional<std::size_t> attribute;
  std::string id;  // example id, for manifest checks
  std::string rule;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      if (!v.id.empty()) out += "[" + v.id + "] ";
      if (v.attribute) out += "attribute " + std::to_string(*v.attribute) + ": ";
      out += v.rule;
    }
    return out;
  }
};

inline ValidationResult validate_partition(const AttributeSchema& schema, const AttributePartition& p) {
  ValidationResult r;
  const std::size_t m = schema.size();
  const auto add = [&](std::optional<std::size_t> k, std::string rule) {
    r.violations.push_back({k, {}, std::move(rule)});
  };

  std::vector<int> seen(m, 0);
  std::vector<bool> reported(m, false);
  const auto claim = [&](std::size_t k) {
    if (k >= m) {
      add(k, "attribute index out of range (M=" + std::to_string(m) + ")");
      return;
    }
    if (++seen[k] == 2 && !reported[k]) {
      reported[k] = true;
      add(k, "attribute " + std::to_string(k) + " assigned two roles");
    }
  };
  if (p.domain_splitting) claim(*p.domain_splitting);
  for (auto k : p.shared) claim(k);
  for (auto k : p.specific_a) claim(k);
  for (auto k : p.specific_b) claim(k);
  for (std::size_t k = 0; k < m; ++k)
    if (seen[k] == 0) add(k, "attribute has no role");

  const auto valid_code = [&](std::size_t k, CategoryCode c) {
    return k < m && schema[k].categorical() && c >= 0 &&
           static_cast<std::size_t>(c) < schema[k].cardinality();
  };

  if (p.domain_splitting.has_value() != p.split_values.has_value())
    add(p.domain_splitting, "domain-splitting attribute and its values q^A, q^B must be given together");
  if (p.domain_splitting && p.split_values) {
    const auto k = *p.domain_splitting;
    if (k < m && !schema[k].categorical()) add(k, "domain-splitting attribute must be categorical");
    if (p.split_values->a == p.split_values->b) add(k, "q^A must differ from q^B");
    if (!valid_code(k, p.split_values->a)) add(k, "q^A is not a valid value");
    if (!valid_code(k, p.split_values->b)) add(k, "q^B is not a valid value");
  }

  const auto check_fixed = [&](const std::vector<std::size_t>& specific,
                               const std::map<std::size_t, CategoryCode>& fixed, std::string_view dom) {
    const std::set<std::size_t> expected(specific.begin(), specific.end());
    for (auto k : expected)
      if (!fixed.count(k)) add(k, "missing fixed value in domain " + std::string(dom));
    for (const auto& [k, c] : fixed) {
      if (!expected.count(k)) {
        add(k, "fixed value in domain " + std::string(dom) +
                   " for an attribute that is not specific to the other domain");
      } else if (!valid_code(k, c)) {
        add(k, "fixed value in domain " + std::string(dom) + " is not a valid value");
      }
    }
  };
  check_fixed(p.specific_a, p.fixed_in_b, "B");
  check_fixed(p.specific_b, p.fixed_in_a, "A");

  for (std::size_t k = 0; k < m; ++k) {
    const auto& d = schema[k];
    const bool shared = std::find(p.shared.begin(), p.shared.end(), k) != p.shared.end();
    if (!d.categorical() && seen[k] > 0 && !shared)
      add(k, "continuous attributes may only be shared");
    if (d.categorical() && d.cardinality() < 2 && seen[k] > 0)
      add(k, "categorical attribute has fewer than 2 values and cannot vary");
  }
  return r;
}

inline Role attribute_role(const AttributePartition& p, std::size_t k) {
  const auto in = [k](const std::vector<std::size_t>& s) {
    return std::find(s.begin(), s.end(), k) != s.end();
  };
  if (p.domain_splitting == k) return Role::DomainSplitting;
  if (in(p.shared)) return Role::Shared;
  if (in(p.specific_a)) return Role::SpecificA;
  if (in(p.specific_b)) return Role::SpecificB;
  throw std::out_of_range("attribute " + std::to_string(k) + " has no role in the partition");
}

// Role of every attribute, indexed by attribute. Partition must be valid.
inline std::vector<Role> role_table(const AttributeSchema& schema, const AttributePartition& p) {
  std::vector<Role> roles(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k) roles[k] = attribute_role(p, k);
  return roles;
}

inline bool is_fixed_in(const AttributePartition& p, Domain d, std::size_t k) {
  return p.domain_splitting == k || p.fixed_in(d).count(k) > 0;
}

inline CategoryCode fixed_value(const AttributePartition& p, Domain d, std::size_t k) {
  if (p.domain_splitting == k && p.split_values) return *p.split_value(d);
  const auto& fixed = p.fixed_in(d);
  if (const auto it = fixed.find(k); it != fixed.end()) return it->second;
  throw std::invalid_argument("attribute " + std::to_string(k) + " is not fixed in this domain");
}

// True iff y satisfies the membership predicate of domain d.
inline bool belongs_to(const AttributeSchema& schema, const AttributePartition& p, Domain d,
                       const AttributeVector& y) {
  if (p.domain_splitting && schema.code(y, *p.domain_splitting) != *p.split_value(d)) return false;
  for (const auto& [k, c] : p.fixed_in(d))
    if (schema.code(y, k) != c) return false;
  return true;
}

// Names every failed clause of the membership predicate.
inline std::vector<std::string> membership_failures(const AttributeSchema& schema, const AttributePartition& p,
                                                    Domain d, const AttributeVector& y) {
  std::vector<std::string> out;
  const auto expect = [&](std::size_t k, CategoryCode want) {
    const auto got = schema.code(y, k);
    if (got != want) {
      out.push_back(schema[k].name + " = " + schema.label_of(k, got) + ", domain " +
                    std::string(to_string(d)) + " requires " + schema.label_of(k, want));
    }
  };
  if (p.domain_splitting) expect(*p.domain_splitting, *p.split_value(d));
  for (const auto& [k, c] : p.fixed_in(d)) expect(k, c);
  return out;
}

enum class OverlapPolicy { Exclude, KeepBoth };

// Keep only examples where exactly one of `attributes` takes value 1.
struct ExactlyOneFilter {
  std::vector<std::size_t> attributes;
  friend bool operator==(const ExactlyOneFilter&, const ExactlyOneFilter&) = default;
};

// A partition as declared in a `.partition` file.
struct PartitionConfig {
  std::string name;
  AttributePartition partition;
  std::vector<ExactlyOneFilter> prefilters;
  OverlapPolicy overlap = OverlapPolicy::Exclude;

  friend bool operator==(const PartitionConfig&, const PartitionConfig&) = default;
};

namespace detail {

inline std::vector<std::size_t> parse_name_list(const AttributeSchema& schema, std::string_view value) {
  std::vector<std::size_t> out;
  if (trim(value).empty()) return out;
  for (const auto& name : split(value, ',')) out.push_back(schema.require_index(name));
  return out;
}

inline CategoryCode parse_label(const AttributeSchema& schema, std::size_t k, std::string_view label) {
  const auto& d = schema[k];
  if (!d.categorical())
    throw ConfigError("attribute '" + d.name + "' is continuous and cannot take a fixed value");
  if (auto c = schema.code_of(k, trim(label))) return *c;
  throw ConfigError("'" + std::string(trim(label)) + "' is not a label of attribute '" + d.name + "'");
}

inline std::string name_list(const AttributeSchema& schema, std::vector<std::size_t> ks) {
  std::sort(ks.begin(), ks.end());
  std::vector<std::string> names;
  for (auto k : ks) names.push_back(schema[k].name);
  return join(names, ", ");
}

}  // namespace detail

// Partition text format (`key = value`, '#' comments):
//
//   name = 3dshapes
//   domain_splitting = Male
//   split_values = 1, 0            # q^A, q^B as labels
//   shared = shape, object_hue
//   specific_a = floor_hue, wall_hue
//   specific_b = size, orientation
//   fixed_in_a.size = 5            # t^A for Z_s^B
//   fixed_in_b.floor_hue = red     # t^B for Z_s^A
//   require_exactly_one = Black_Hair, Blond_Hair, Brown_Hair
//   overlap = keep_both            # default: exclude
inline PartitionConfig parse_partition(std::string_view text, const AttributeSchema& schema) {
  PartitionConfig cfg;
  auto& p = cfg.partition;
  std::optional<std::size_t> zd;
  std::optional<std::pair<std::string, std::string>> split_labels;
  std::set<std::string> seen_keys;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    try {
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'");
      const std::string key(detail::trim(body.substr(0, eq)));
      const auto value = detail::trim(body.substr(eq + 1));
      if (key != "require_exactly_one" && !seen_keys.insert(key).second)
        throw ConfigError("duplicate key '" + key + "'");

      if (key == "name") {
        cfg.name = std::string(value);
      } else if (key == "domain_splitting") {
        zd = schema.require_index(value);
      } else if (key == "split_values") {
        const auto parts = detail::split(value, ',');
        if (parts.size() != 2) throw ConfigError("split_values needs exactly two labels");
        split_labels = std::make_pair(parts[0], parts[1]);
      } else if (key == "shared") {
        p.shared = detail::parse_name_list(schema, value);
      } else if (key == "specific_a") {
        p.specific_a = detail::parse_name_list(schema, value);
      } else if (key == "specific_b") {
        p.specific_b = detail::parse_name_list(schema, value);
      } else if (key.rfind("fixed_in_a.", 0) == 0 || key.rfind("fixed_in_b.", 0) == 0) {
        const auto k = schema.require_index(key.substr(11));
        auto& target = key[9] == 'a' ? p.fixed_in_a : p.fixed_in_b;
        target[k] = detail::parse_label(schema, k, value);
      } else if (key == "require_exactly_one") {
        cfg.prefilters.push_back({detail::parse_name_list(schema, value)});
      } else if (key == "overlap") {
        if (value == "exclude") cfg.overlap = OverlapPolicy::Exclude;
        else if (value == "keep_both") cfg.overlap = OverlapPolicy::KeepBoth;
        else throw ConfigError("overlap must be 'exclude' or 'keep_both'");
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("partition line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (zd) {
    p.domain_splitting = zd;
    if (split_labels) {
      p.split_values = SplitValues{detail::parse_label(schema, *zd, split_labels->first),
                                   detail::parse_label(schema, *zd, split_labels->second)};
    }
  } else if (split_labels) {
    throw ConfigError("split_values given without domain_splitting");
  }
  std::sort(p.shared.begin(), p.shared.end());
  std::sort(p.specific_a.begin(), p.specific_a.end());
  std::sort(p.specific_b.begin(), p.specific_b.end());
  return cfg;
}

// Canonical form: fixed key order, attributes in index order.
inline std::string serialize_partition(const PartitionConfig& cfg, const AttributeSchema& schema) {
  const auto& p = cfg.partition;
  std::string out;
  const auto line = [&out](std::string_view key, const std::string& value) {
    out += key;
    out += value.empty() ? " =\n" : " = " + value + "\n";
  };
  if (!cfg.name.empty()) line("name", cfg.name);
  if (p.domain_splitting) {
    const auto k = *p.domain_splitting;
    line("domain_splitting", schema[k].name);
    if (p.split_values)
      line("split_values", schema.label_of(k, p.split_values->a) + ", " + schema.label_of(k, p.split_values->b));
  }
  line("shared", detail::name_list(schema, p.shared));
  line("specific_a", detail::name_list(schema, p.specific_a));
  line("specific_b", detail::name_list(schema, p.specific_b));
  for (const auto& [k, c] : p.fixed_in_a) line("fixed_in_a." + schema[k].name, schema.label_of(k, c));
  for (const auto& [k, c] : p.fixed_in_b) line("fixed_in_b." + schema[k].name, schema.label_of(k, c));
  for (const auto& f : cfg.prefilters) line("require_exactly_one", detail::name_list(schema, f.attributes));
  if (cfg.overlap == OverlapPolicy::KeepBoth) line("overlap", "keep_both");
  return out;
}

// Identifies a (schema, partition) pair; manifests, triplet files and reports carry it.
inline std::string partition_hash(const AttributeSchema& schema, const PartitionConfig& cfg) {
  return detail::hex64(detail::fnv1a64(serialize_schema(schema) + "--\n" + serialize_partition(cfg, schema)));
}

inline PartitionConfig validated(const AttributeSchema& schema, PartitionConfig cfg) {
  if (const auto r = validate_partition(schema, cfg.partition); !r.ok())
    throw ConfigError("invalid partition: " + r.summary());
  for (const auto& f : cfg.prefilters)
    for (auto k : f.attributes)
      if (!schema[k].categorical() || schema[k].cardinality() != 2)
        throw ConfigError("require_exactly_one attribute '" + schema[k].name + "' must be binary");
  return cfg;
}

}  // namespace ummi
