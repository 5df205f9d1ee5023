#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>

#include "ummi/error.hpp"
#include "ummi/metrics.hpp"

namespace ummi {

struct PoseReport {
  std::array<double, 3> mean_abs_delta{};  // |Δyaw|, |Δpitch|, |Δroll| against the input, degrees
  double mean_distance = 0;                // D_p, mean of the three channels
  double match_fraction = 0;               // PM: share of outputs closer to the input than to the guidance
  std::size_t triplets = 0;
};

// `pose_attribute` must be continuous with three channels (yaw, pitch, roll).
inline PoseReport pose_report(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                              std::size_t pose_attribute) {
  if (pose_attribute >= schema.size()) throw DataError("pose attribute index out of range");
  const auto& d = schema[pose_attribute];
  if (d.categorical() || d.channels != 3)
    throw DataError("attribute '" + d.name + "' does not carry yaw/pitch/roll channels");
  if (triplets.empty()) throw std::invalid_argument("pose report needs at least one triplet");

  PoseReport r;
  std::size_t matches = 0;
  for (const auto& t : triplets) {
    for (const auto* v : {&t.y_a, &t.y_b, &t.y_hat})
      if (v->slot_count() != schema.slot_count()) throw DataError("triplet '" + t.input_id + "' lacks pose channels");
    const auto in = schema.value(t.y_a, pose_attribute);
    const auto guide = schema.value(t.y_b, pose_attribute);
    const auto out = schema.value(t.y_hat, pose_attribute);
    for (std::size_t c = 0; c < 3; ++c) r.mean_abs_delta[c] += std::abs(out[c] - in[c]);
    matches += attribute_match(schema, pose_attribute, out, in, guide);
  }
  const double n = static_cast<double>(triplets.size());
  for (auto& x : r.mean_abs_delta) x /= n;
  r.mean_distance = (r.mean_abs_delta[0] + r.mean_abs_delta[1] + r.mean_abs_delta[2]) / 3.0;
  r.match_fraction = static_cast<double>(matches) / n;
  r.triplets = triplets.size();
  return r;
}

}  // namespace ummi
