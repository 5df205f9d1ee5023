#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ummi/error.hpp"
#include "ummi/partition.hpp"
#include "ummi/schema.hpp"

namespace ummi {

// One evaluation unit. y_a is the input (source-domain) image, y_b the
// guidance (target-domain) image, y_hat the attributes predicted on the output.
struct TranslationTriplet {
  Direction direction = Direction::A2B;
  AttributeVector y_a;
  AttributeVector y_b;
  AttributeVector y_hat;
  std::optional<AttributeVector> y_a_gt;
  std::optional<AttributeVector> y_b_gt;
  std::string input_id;
  std::string guidance_id;

  friend bool operator==(const TranslationTriplet&, const TranslationTriplet&) = default;
};

enum class LabelSource {
  AsGiven,      // y_a, y_b as stored (typically regressor predictions)
  GroundTruth,  // y_a_gt, y_b_gt for the reference images
};

enum class Metric { TranslationQuality, ContentPreservation, StyleTransfer, Bias };
inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::TranslationQuality, Metric::ContentPreservation,
                                                      Metric::StyleTransfer, Metric::Bias};

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::TranslationQuality: return "q_tr";
    case Metric::ContentPreservation: return "d_c";
    case Metric::StyleTransfer: return "d_s";
    case Metric::Bias: return "b";
  }
  return "?";
}

// Perfect translation target y*: shared attributes from the input, target-specific
// from the guidance, source-specific and z_d pinned to the target's fixed values.
inline AttributeVector perfect_attributes(const AttributeSchema& schema, const AttributePartition& p, Direction dir,
                                          const AttributeVector& y_a, const AttributeVector& y_b) {
  const Domain src = source_of(dir);
  const Domain tgt = target_of(dir);
  AttributeVector out = y_a;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const Role role = attribute_role(p, k);
    if (role == Role::Shared) continue;
    if (role == specific_role(tgt)) {
      const auto from = schema.value(y_b, k);
      auto into = out.slots().subspan(schema[k].offset, from.size());
      std::copy(from.begin(), from.end(), into.begin());
    } else if (role == specific_role(src) || role == Role::DomainSplitting) {
      schema.set_code(out, k, fixed_value(p, tgt, k));
    }
  }
  return out;
}

// Mean absolute per-channel difference.
inline double channel_distance(std::span<const double> u, std::span<const double> v) {
  double sum = 0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += std::abs(u[i] - v[i]);
  return u.empty() ? 0.0 : sum / static_cast<double>(u.size());
}

// Categorical: exact equality with `ref`. Continuous: strictly closer to `ref`
// than to `other`; equidistant counts as a mismatch.
inline bool attribute_match(const AttributeSchema& schema, std::size_t k, std::span<const double> test,
                            std::span<const double> ref, std::optional<std::span<const double>> other = {}) {
  const auto& d = schema[k];
  if (d.categorical()) return test[0] == ref[0];
  if (!other) throw std::invalid_argument("continuous attribute '" + d.name + "' needs a competing reference");
  return channel_distance(test, ref) < channel_distance(test, *other);
}

// Conditioning count and event count for one (metric, attribute) cell. For
// Q_tr/D_c/D_s the event is a success; for B it is a change (ŷ_k ≠ y*_k).
// Counts are weights so exact expectations can use the same type.
struct AttributeScore {
  Metric metric = Metric::TranslationQuality;
  std::size_t attribute = 0;
  double conditioned = 0;
  double events = 0;

  // Percent, or nullopt when the conditioning set is empty.
  std::optional<double> percent() const {
    if (conditioned <= 0) return std::nullopt;
    return 100.0 * events / conditioned;
  }

  friend bool operator==(const AttributeScore&, const AttributeScore&) = default;
};

// Attributes each metric averages over, in index order.
inline std::vector<std::size_t> metric_attributes(const AttributeSchema& schema, const AttributePartition& p,
                                                  Metric m, Direction dir) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const Role role = attribute_role(p, k);
    bool in = false;
    switch (m) {
      case Metric::TranslationQuality:
        in = role == Role::DomainSplitting || role == specific_role(source_of(dir));
        break;
      case Metric::ContentPreservation: in = role == Role::Shared; break;
      case Metric::StyleTransfer: in = role == specific_role(target_of(dir)); break;
      case Metric::Bias: in = role != Role::DomainSplitting && schema[k].categorical(); break;
    }
    if (in) out.push_back(k);
  }
  return out;
}

// Macro average over attributes with a non-empty conditioning set.
inline std::optional<double> macro_average(std::span<const AttributeScore> scores, Metric m) {
  double sum = 0;
  std::size_t defined = 0;
  for (const auto& s : scores) {
    if (s.metric != m) continue;
    if (const auto v = s.percent()) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / static_cast<double>(defined);
}

struct DirectionReport {
  Direction direction = Direction::A2B;
  double triplets = 0;
  double membership_violations = 0;
  std::optional<double> q_tr;
  std::optional<double> d_s;
  std::optional<double> d_c;
  std::optional<double> bias;
  // Ordered by metric, then attribute index.
  std::vector<AttributeScore> per_attribute;

  std::optional<double> value(Metric m) const {
    switch (m) {
      case Metric::TranslationQuality: return q_tr;
      case Metric::ContentPreservation: return d_c;
      case Metric::StyleTransfer: return d_s;
      case Metric::Bias: return bias;
    }
    return std::nullopt;
  }

  const AttributeScore* find(Metric m, std::size_t k) const {
    for (const auto& s : per_attribute)
      if (s.metric == m && s.attribute == k) return &s;
    return nullptr;
  }

  friend bool operator==(const DirectionReport&, const DirectionReport&) = default;
};

// Fills headline values from per-attribute cells.
inline void finalize(DirectionReport& r) {
  r.q_tr = macro_average(r.per_attribute, Metric::TranslationQuality);
  r.d_c = macro_average(r.per_attribute, Metric::ContentPreservation);
  r.d_s = macro_average(r.per_attribute, Metric::StyleTransfer);
  r.bias = macro_average(r.per_attribute, Metric::Bias);
}

inline constexpr double kDefaultBiasThreshold = 30.0;

struct Aggregate {
  std::optional<double> q_tr;  // mean of the two directions
  std::optional<double> d;     // ¼(D_s^A2B + D_s^B2A + D_c^A2B + D_c^B2A)
  std::optional<double> d_c;   // ½(D_c^A2B + D_c^B2A)
  std::optional<double> bias;  // mean of the per-direction B
  bool low_confidence = false;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

namespace detail {
inline std::optional<double> mean2(std::optional<double> x, std::optional<double> y) {
  if (!x || !y) return std::nullopt;
  return (*x + *y) / 2.0;
}
}  // namespace detail

// Cross-direction aggregates; D̄_c is the plain mean of the two directions.
inline Aggregate aggregate(const std::optional<DirectionReport>& a2b, const std::optional<DirectionReport>& b2a,
                           double bias_threshold = kDefaultBiasThreshold) {
  if (!a2b || !b2a) throw std::invalid_argument("aggregate needs both A2B and B2A reports");
  Aggregate g;
  g.q_tr = detail::mean2(a2b->q_tr, b2a->q_tr);
  g.d_c = detail::mean2(a2b->d_c, b2a->d_c);
  if (a2b->d_s && b2a->d_s && a2b->d_c && b2a->d_c) g.d = (*a2b->d_s + *b2a->d_s + *a2b->d_c + *b2a->d_c) / 4.0;
  if (a2b->bias && b2a->bias) g.bias = (*a2b->bias + *b2a->bias) / 2.0;
  else g.bias = a2b->bias ? a2b->bias : b2a->bias;
  g.low_confidence = g.bias && *g.bias > bias_threshold;
  return g;
}

struct MetricReport {
  std::optional<DirectionReport> a2b;
  std::optional<DirectionReport> b2a;
  Aggregate overall;
  double bias_threshold = kDefaultBiasThreshold;

  const std::optional<DirectionReport>& direction(Direction d) const { return d == Direction::A2B ? a2b : b2a; }

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline MetricReport assemble_report(std::optional<DirectionReport> a2b, std::optional<DirectionReport> b2a,
                                    double bias_threshold) {
  MetricReport r;
  r.a2b = std::move(a2b);
  r.b2a = std::move(b2a);
  r.bias_threshold = bias_threshold;
  if (r.a2b && r.b2a) {
    r.overall = aggregate(r.a2b, r.b2a, bias_threshold);
  } else if (const auto& only = r.a2b ? r.a2b : r.b2a) {
    r.overall.q_tr = only->q_tr;
    r.overall.bias = only->bias;
    r.overall.low_confidence = only->bias && *only->bias > bias_threshold;
  }
  return r;
}

// Commutative fold over triplets: per (direction, metric, attribute) integer
// counters. Accumulators over disjoint chunks merge to the same result as one
// accumulator over the whole sequence.
class MetricAccumulator {
 public:
  MetricAccumulator(const AttributeSchema& schema, const AttributePartition& p,
                    LabelSource labels = LabelSource::AsGiven)
      : schema_(&schema), partition_(&p), roles_(role_table(schema, p)), labels_(labels) {
    for (auto& dir : counts_)
      for (auto& per_metric : dir.cells) per_metric.assign(schema.size(), Counter{});
  }

  void add(const TranslationTriplet& t) {
    const auto& schema = *schema_;
    const auto& p = *partition_;
    const AttributeVector& y_a = reference(t.y_a, t.y_a_gt, "y_a_gt");
    const AttributeVector& y_b = reference(t.y_b, t.y_b_gt, "y_b_gt");
    for (const auto* v : {&y_a, &y_b, &t.y_hat})
      if (v->slot_count() != schema.slot_count())
        throw DataError("triplet '" + t.input_id + "' vector does not match the schema");

    const Domain src = source_of(t.direction);
    const Domain tgt = target_of(t.direction);
    auto& dc = counts_[static_cast<std::size_t>(t.direction)];
    ++dc.triplets;
    if (!belongs_to(schema, p, src, y_a) || !belongs_to(schema, p, tgt, y_b)) ++dc.violations;

    for (std::size_t k = 0; k < schema.size(); ++k) {
      const Role role = roles_[k];
      const auto a = schema.value(y_a, k);
      const auto b = schema.value(y_b, k);
      const auto hat = schema.value(t.y_hat, k);
      const bool differ = !schema.same_value(y_a, y_b, k);

      if (!schema[k].categorical()) {
        // Continuous attributes are shared-only and never enter B.
        if (differ) bump(dc, Metric::ContentPreservation, k, attribute_match(schema, k, hat, a, b));
        continue;
      }
      const double out = hat[0];
      if (role == Role::DomainSplitting || role == specific_role(src)) {
        if (differ) bump(dc, Metric::TranslationQuality, k, out == fixed_value(p, tgt, k));
        else if (role != Role::DomainSplitting) bump(dc, Metric::Bias, k, out != fixed_value(p, tgt, k));
      } else if (role == Role::Shared) {
        bump(dc, differ ? Metric::ContentPreservation : Metric::Bias, k, differ ? out == a[0] : out != a[0]);
      } else {  // target-specific
        bump(dc, differ ? Metric::StyleTransfer : Metric::Bias, k, differ ? out == b[0] : out != b[0]);
      }
    }
  }

  MetricAccumulator& merge(const MetricAccumulator& other) {
    for (std::size_t d = 0; d < counts_.size(); ++d) {
      counts_[d].triplets += other.counts_[d].triplets;
      counts_[d].violations += other.counts_[d].violations;
      for (std::size_t m = 0; m < kAllMetrics.size(); ++m)
        for (std::size_t k = 0; k < schema_->size(); ++k) {
          counts_[d].cells[m][k].n += other.counts_[d].cells[m][k].n;
          counts_[d].cells[m][k].events += other.counts_[d].cells[m][k].events;
        }
    }
    return *this;
  }

  std::uint64_t triplets(Direction dir) const { return counts_[static_cast<std::size_t>(dir)].triplets; }

  DirectionReport report(Direction dir) const {
    const auto& dc = counts_[static_cast<std::size_t>(dir)];
    DirectionReport r;
    r.direction = dir;
    r.triplets = static_cast<double>(dc.triplets);
    r.membership_violations = static_cast<double>(dc.violations);
    for (const Metric m : kAllMetrics) {
      for (const auto k : metric_attributes(*schema_, *partition_, m, dir)) {
        const auto& c = dc.cells[static_cast<std::size_t>(m)][k];
        r.per_attribute.push_back({m, k, static_cast<double>(c.n), static_cast<double>(c.events)});
      }
    }
    finalize(r);
    return r;
  }

  MetricReport report(double bias_threshold = kDefaultBiasThreshold) const {
    std::optional<DirectionReport> a2b, b2a;
    if (triplets(Direction::A2B) > 0) a2b = report(Direction::A2B);
    if (triplets(Direction::B2A) > 0) b2a = report(Direction::B2A);
    return assemble_report(std::move(a2b), std::move(b2a), bias_threshold);
  }

 private:
  struct Counter {
    std::uint64_t n = 0;
    std::uint64_t events = 0;
  };
  struct DirectionCounts {
    std::uint64_t triplets = 0;
    std::uint64_t violations = 0;
    std::array<std::vector<Counter>, 4> cells;
  };

  static void bump(DirectionCounts& dc, Metric m, std::size_t k, bool event) {
    auto& c = dc.cells[static_cast<std::size_t>(m)][k];
    ++c.n;
    c.events += event ? 1 : 0;
  }

  const AttributeVector& reference(const AttributeVector& given, const std::optional<AttributeVector>& gt,
                                   const char* field) const {
    if (labels_ == LabelSource::AsGiven) return given;
    if (!gt) throw DataError(std::string("ground-truth labels requested but triplet lacks ") + field);
    return *gt;
  }

  const AttributeSchema* schema_;
  const AttributePartition* partition_;
  std::vector<Role> roles_;
  LabelSource labels_;
  std::array<DirectionCounts, 2> counts_;
};

struct EvalOptions {
  double bias_threshold = kDefaultBiasThreshold;
  LabelSource labels = LabelSource::AsGiven;
  // Number of threads folding disjoint chunks; results do not depend on it.
  std::size_t workers = 1;
};

inline MetricReport evaluate(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                             const AttributePartition& p, const EvalOptions& opt = {}) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, triplets.size()));
  std::vector<MetricAccumulator> parts(workers, MetricAccumulator(schema, p, opt.labels));
  if (workers == 1) {
    for (const auto& t : triplets) parts[0].add(t);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (triplets.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          const auto begin = std::min(triplets.size(), w * chunk);
          const auto end = std::min(triplets.size(), begin + chunk);
          for (auto i = begin; i < end; ++i) parts[w].add(triplets[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (std::size_t w = 1; w < workers; ++w) parts[0].merge(parts[w]);
  }
  return parts[0].report(opt.bias_threshold);
}

// Single-metric result for one direction.
struct MetricScore {
  double value = 0;
  std::vector<AttributeScore> per_attribute;
};

namespace detail {

inline Direction common_direction(std::span<const TranslationTriplet> triplets) {
  if (triplets.empty()) throw std::invalid_argument("metric needs at least one triplet");
  const Direction d = triplets.front().direction;
  for (const auto& t : triplets)
    if (t.direction != d) throw std::invalid_argument("triplets mix translation directions");
  return d;
}

inline MetricScore single_metric(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                                 const AttributePartition& p, Metric m) {
  const Direction dir = common_direction(triplets);
  MetricAccumulator acc(schema, p);
  for (const auto& t : triplets) acc.add(t);
  const auto r = acc.report(dir);
  MetricScore s;
  for (const auto& a : r.per_attribute)
    if (a.metric == m) s.per_attribute.push_back(a);
  const auto v = r.value(m);
  if (!v) throw UndefinedMetricError(std::string(to_string(m)) + " is undefined: every conditioning set is empty");
  s.value = *v;
  return s;
}

}  // namespace detail

// Q_tr: E_k P(ŷ_k = y*_k | y_a,k ≠ y_b,k) over source-specific attributes and z_d.
inline MetricScore translation_quality(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                                       const AttributePartition& p) {
  return detail::single_metric(triplets, schema, p, Metric::TranslationQuality);
}

// D_c: E_k P(ŷ_k matches y_a,k | y_a,k ≠ y_b,k) over shared attributes.
inline MetricScore content_preservation(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                                        const AttributePartition& p) {
  return detail::single_metric(triplets, schema, p, Metric::ContentPreservation);
}

// D_s: E_k P(ŷ_k = y_b,k | y_a,k ≠ y_b,k) over target-specific attributes.
inline MetricScore style_transfer(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                                  const AttributePartition& p) {
  return detail::single_metric(triplets, schema, p, Metric::StyleTransfer);
}

struct BiasScore {
  double value = 0;
  std::optional<double> a2b;
  std::optional<double> b2a;
  std::vector<AttributeScore> per_attribute_a2b;
  std::vector<AttributeScore> per_attribute_b2a;
};

// B: E_k P(ŷ_k ≠ y*_k | y_a,k = y_b,k), per direction then averaged.
inline BiasScore bias(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema,
                      const AttributePartition& p) {
  if (triplets.empty()) throw std::invalid_argument("bias needs at least one triplet");
  MetricAccumulator acc(schema, p);
  for (const auto& t : triplets) acc.add(t);
  BiasScore s;
  for (const Direction dir : {Direction::A2B, Direction::B2A}) {
    if (acc.triplets(dir) == 0) continue;
    const auto r = acc.report(dir);
    auto& cells = dir == Direction::A2B ? s.per_attribute_a2b : s.per_attribute_b2a;
    for (const auto& a : r.per_attribute)
      if (a.metric == Metric::Bias) cells.push_back(a);
    (dir == Direction::A2B ? s.a2b : s.b2a) = r.bias;
  }
  if (s.a2b && s.b2a) s.value = (*s.a2b + *s.b2a) / 2.0;
  else if (s.a2b || s.b2a) s.value = s.a2b ? *s.a2b : *s.b2a;
  else throw UndefinedMetricError("b is undefined: every conditioning set is empty");
  return s;
}

}  // namespace ummi
