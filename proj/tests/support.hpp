#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>

#include "ummi/io.hpp"
#include "ummi/partition.hpp"
#include "ummi/schema.hpp"

namespace ummi::test {

inline const std::filesystem::path kConfigDir = UMMI_CONFIG_DIR;

struct Shipped {
  AttributeSchema schema;
  PartitionConfig config;
  const AttributePartition& partition() const { return config.partition; }
};

inline Shipped shipped(const std::string& name) {
  Shipped s;
  s.schema = parse_schema(read_file(kConfigDir / (name + ".schema")));
  s.config = validated(s.schema, parse_partition(read_file(kConfigDir / (name + ".partition")), s.schema));
  return s;
}

inline AttributeVector vec(std::initializer_list<double> xs) { return AttributeVector(std::vector<double>(xs)); }

// M = 4: z_d = 0 (q^A = 0, q^B = 1), Z_c = {1}, Z_s^A = {2} with t^B = 8,
// Z_s^B = {3} with t^A = 2.
inline Shipped four_attribute_setup() {
  Shipped s;
  s.schema.add_categorical("d", 2);
  s.schema.add_categorical("c", 10);
  s.schema.add_categorical("sa", 10);
  s.schema.add_categorical("sb", 5);
  auto& p = s.config.partition;
  p.domain_splitting = 0;
  p.split_values = SplitValues{0, 1};
  p.shared = {1};
  p.specific_a = {2};
  p.specific_b = {3};
  p.fixed_in_b = {{2, 8}};
  p.fixed_in_a = {{3, 2}};
  return s;
}

}  // namespace ummi::test
