#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "ummi/partition.hpp"
#include "ummi/rng.hpp"
#include "ummi/schema.hpp"
#include "ummi/splitter.hpp"

namespace ummi::fixtures {

// The six 3D-Shapes factors in schema order. Orientation labels are the
// rounded angles of the 15 evenly spaced views in [-30, 30].
inline AttributeSchema three_d_shapes_schema() {
  const std::vector<std::string> hues = {"red",  "orange", "yellow", "lime",   "green",
                                         "teal", "cyan",   "blue",   "purple", "magenta"};
  std::vector<std::string> orientation;
  for (int i = 0; i < 15; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", -30.0 + 60.0 * i / 14.0);
    std::string s = buf;
    if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
    if (s == "-0") s = "0";
    orientation.push_back(s);
  }
  AttributeSchema schema;
  schema.add_categorical("shape", {"cube", "cylinder", "sphere", "capsule"});
  schema.add_categorical("object_hue", hues);
  schema.add_categorical("floor_hue", hues);
  schema.add_categorical("wall_hue", hues);
  schema.add_categorical("size", {"1", "2", "3", "4", "5", "6", "7", "8"});
  schema.add_categorical("orientation", orientation);
  return schema;
}

// The full 480,000-image factor grid. Ids follow the index order of the
// original HDF5 file: floor, wall, object hue, scale, shape, orientation.
inline std::vector<LabeledExample> three_d_shapes_grid() {
  std::vector<LabeledExample> out;
  out.reserve(480000);
  std::size_t index = 0;
  char id[16];
  for (int floor = 0; floor < 10; ++floor)
    for (int wall = 0; wall < 10; ++wall)
      for (int object = 0; object < 10; ++object)
        for (int scale = 0; scale < 8; ++scale)
          for (int shape = 0; shape < 4; ++shape)
            for (int orient = 0; orient < 15; ++orient) {
              std::snprintf(id, sizeof id, "%06zu", index++);
              out.push_back({id, AttributeVector({static_cast<double>(shape), static_cast<double>(object),
                                                  static_cast<double>(floor), static_cast<double>(wall),
                                                  static_cast<double>(scale), static_cast<double>(orient)})});
            }
  return out;
}

// Every `stride`-th example, at most `limit` of them.
inline DomainManifest subsample(const DomainManifest& m, std::size_t limit) {
  DomainManifest out = m;
  out.examples.clear();
  if (m.empty() || limit == 0) return out;
  const std::size_t stride = std::max<std::size_t>(1, m.size() / limit);
  for (std::size_t i = 0; i < m.size() && out.size() < limit; i += stride) out.examples.push_back(m.examples[i]);
  return out;
}

// Random members of domain d: pinned attributes at their fixed values, the
// rest uniform (categorical) or uniform on [-45, 45] degrees (continuous).
inline DomainManifest synthesize_domain(const AttributeSchema& schema, const PartitionConfig& cfg, Domain d,
                                        std::size_t n, std::uint64_t seed) {
  const auto& p = cfg.partition;
  DomainManifest m;
  m.domain = d;
  m.partition_hash = partition_hash(schema, cfg);
  m.provenance.source = "synthetic";
  const std::uint64_t base = static_cast<std::uint64_t>(d) << 40;
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, base + i);
    AttributeVector v(std::vector<double>(schema.slot_count()));
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const auto& decl = schema[k];
      if (is_fixed_in(p, d, k)) {
        schema.set_code(v, k, fixed_value(p, d, k));
      } else if (decl.categorical()) {
        schema.set_code(v, k, static_cast<CategoryCode>(rng.below(decl.cardinality())));
      } else {
        for (std::size_t c = 0; c < decl.channels; ++c) v.slots()[decl.offset + c] = -45.0 + 90.0 * rng.uniform();
      }
    }
    // Prefilters (e.g. exactly one hair colour) are satisfied by forcing one member on.
    for (const auto& f : cfg.prefilters) {
      std::vector<std::size_t> free;
      for (auto k : f.attributes)
        if (!is_fixed_in(p, d, k)) free.push_back(k);
      bool pinned_on = false;
      for (auto k : f.attributes)
        if (is_fixed_in(p, d, k) && fixed_value(p, d, k) == 1) pinned_on = true;
      for (auto k : free) schema.set_code(v, k, 0);
      if (!pinned_on && !free.empty()) schema.set_code(v, free[rng.below(free.size())], 1);
    }
    m.examples.push_back({std::string(to_string(d)) + "_" + std::to_string(i), std::move(v)});
  }
  return m;
}

// Five attributes covering every role, one of them continuous.
inline AttributeSchema toy_schema() {
  return parse_schema(
      "domain = categorical(a, b)\n"
      "content = categorical(3)\n"
      "angle = continuous(1)\n"
      "style_a = categorical(3)\n"
      "style_b = categorical(2)\n");
}

inline PartitionConfig toy_partition(const AttributeSchema& schema) {
  return validated(schema, parse_partition("name = toy\n"
                                           "domain_splitting = domain\n"
                                           "split_values = a, b\n"
                                           "shared = content, angle\n"
                                           "specific_a = style_a\n"
                                           "specific_b = style_b\n"
                                           "fixed_in_a.style_b = 1\n"
                                           "fixed_in_b.style_a = 0\n",
                                           schema));
}

}  // namespace ummi::fixtures
