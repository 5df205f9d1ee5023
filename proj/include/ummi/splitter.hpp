#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ummi/error.hpp"
#include "ummi/partition.hpp"
#include "ummi/schema.hpp"

namespace ummi {

struct LabeledExample {
  std::string id;
  AttributeVector values;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct Provenance {
  std::string source;
  std::string filtered_at;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct DomainManifest {
  Domain domain = Domain::A;
  std::string partition_hash;
  std::vector<LabeledExample> examples;
  Provenance provenance;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  friend bool operator==(const DomainManifest&, const DomainManifest&) = default;
};

struct SplitResult {
  DomainManifest a;
  DomainManifest b;
  // Examples satisfying both predicates (only possible without z_d).
  std::vector<std::string> overlapping_ids;
  std::size_t prefiltered_out = 0;
  std::vector<std::string> warnings;

  const DomainManifest& manifest(Domain d) const { return d == Domain::A ? a : b; }
};

inline bool passes_prefilters(const AttributeSchema& schema, const PartitionConfig& cfg, const AttributeVector& y) {
  for (const auto& f : cfg.prefilters) {
    std::size_t asserted = 0;
    for (auto k : f.attributes) asserted += schema.code(y, k) == 1;
    if (asserted != 1) return false;
  }
  return true;
}

// Filters one labeled corpus into domains A and B. Output order is input order.
inline SplitResult build_split(std::span<const LabeledExample> corpus, const AttributeSchema& schema,
                               const PartitionConfig& cfg, Provenance provenance = {}) {
  const auto& p = validated(schema, cfg).partition;
  SplitResult out;
  const auto hash = partition_hash(schema, cfg);
  out.a.domain = Domain::A;
  out.b.domain = Domain::B;
  out.a.partition_hash = out.b.partition_hash = hash;
  out.a.provenance = out.b.provenance = provenance;

  for (const auto& ex : corpus) {
    if (const auto err = schema.conformance_error(ex.values); !err.empty())
      throw DataError("example '" + ex.id + "': " + err);
    if (!passes_prefilters(schema, cfg, ex.values)) {
      ++out.prefiltered_out;
      continue;
    }
    const bool in_a = belongs_to(schema, p, Domain::A, ex.values);
    const bool in_b = belongs_to(schema, p, Domain::B, ex.values);
    if (in_a && in_b) {
      out.overlapping_ids.push_back(ex.id);
      if (cfg.overlap == OverlapPolicy::Exclude) continue;
    }
    if (in_a) out.a.examples.push_back(ex);
    if (in_b) out.b.examples.push_back(ex);
  }
  if (out.a.empty()) out.warnings.push_back("domain A is empty");
  if (out.b.empty()) out.warnings.push_back("domain B is empty");
  if (!out.overlapping_ids.empty()) {
    out.warnings.push_back(std::to_string(out.overlapping_ids.size()) +
                           " examples satisfy both domain predicates and were " +
                           (cfg.overlap == OverlapPolicy::Exclude ? "excluded" : "kept in both domains"));
  }
  return out;
}

inline ValidationResult verify_manifest(const DomainManifest& m, const AttributeSchema& schema,
                                        const AttributePartition& p) {
  ValidationResult r;
  std::unordered_set<std::string> ids;
  for (const auto& ex : m.examples) {
    if (!ids.insert(ex.id).second) r.violations.push_back({std::nullopt, ex.id, "duplicate id"});
    if (const auto err = schema.conformance_error(ex.values); !err.empty()) {
      r.violations.push_back({std::nullopt, ex.id, err});
      continue;
    }
    for (auto& failure : membership_failures(schema, p, m.domain, ex.values))
      r.violations.push_back({std::nullopt, ex.id, std::move(failure)});
  }
  return r;
}

struct AttributeVariation {
  std::size_t attribute = 0;
  Role role = Role::Shared;
  // Categorical: distinct codes observed per domain.
  std::set<CategoryCode> values_a;
  std::set<CategoryCode> values_b;
  // Continuous: per-channel [min, max] per domain.
  std::vector<std::pair<double, double>> range_a;
  std::vector<std::pair<double, double>> range_b;
  bool varies_in_a = false;
  bool varies_in_b = false;
};

struct VariationSummary {
  std::vector<AttributeVariation> attributes;
  std::vector<std::string> warnings;
};

inline VariationSummary split_stats(const DomainManifest& ma, const DomainManifest& mb, const AttributeSchema& schema,
                                    const AttributePartition& p) {
  VariationSummary s;
  const auto scan = [&](const DomainManifest& m, std::size_t k, std::set<CategoryCode>& values,
                        std::vector<std::pair<double, double>>& range) {
    const auto& d = schema[k];
    if (d.categorical()) {
      for (const auto& ex : m.examples) values.insert(schema.code(ex.values, k));
      return values.size() > 1;
    }
    bool varies = false;
    for (const auto& ex : m.examples) {
      const auto v = schema.value(ex.values, k);
      if (range.empty()) {
        for (double x : v) range.emplace_back(x, x);
        continue;
      }
      for (std::size_t c = 0; c < v.size(); ++c) {
        range[c].first = std::min(range[c].first, v[c]);
        range[c].second = std::max(range[c].second, v[c]);
        varies = varies || range[c].first < range[c].second;
      }
    }
    return varies;
  };

  for (std::size_t k = 0; k < schema.size(); ++k) {
    AttributeVariation v;
    v.attribute = k;
    v.role = attribute_role(p, k);
    v.varies_in_a = scan(ma, k, v.values_a, v.range_a);
    v.varies_in_b = scan(mb, k, v.values_b, v.range_b);

    const auto& name = schema[k].name;
    const auto expect = [&](bool want_a, bool want_b) {
      const auto describe = [&](Domain d, bool want, bool got) {
        if (want == got) return;
        s.warnings.push_back("'" + name + "' declared " + std::string(to_string(v.role)) + " but " +
                             (got ? "varies" : "constant") + " in " + std::string(to_string(d)));
      };
      describe(Domain::A, want_a, v.varies_in_a);
      describe(Domain::B, want_b, v.varies_in_b);
    };
    switch (v.role) {
      case Role::DomainSplitting: expect(false, false); break;
      case Role::Shared: expect(true, true); break;
      case Role::SpecificA: expect(true, false); break;
      case Role::SpecificB: expect(false, true); break;
    }
    s.attributes.push_back(std::move(v));
  }
  return s;
}

}  // namespace ummi
