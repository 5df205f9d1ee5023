#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ummi/error.hpp"
#include "ummi/metrics.hpp"
#include "ummi/partition.hpp"
#include "ummi/rng.hpp"
#include "ummi/schema.hpp"
#include "ummi/splitter.hpp"

namespace ummi {

enum class DistributionMode { JointEmpirical, IndependentMarginals };

struct WeightedVector {
  AttributeVector values;
  double probability = 0;
};

// One attribute's value (its slots) with a probability.
struct MarginalPoint {
  std::vector<double> value;
  double probability = 0;
};

// Sampling distribution over one domain's attribute vectors.
struct DomainDistribution {
  Domain domain = Domain::A;
  DistributionMode mode = DistributionMode::JointEmpirical;
  std::vector<WeightedVector> support;               // distinct vectors, sorted
  std::vector<std::vector<MarginalPoint>> marginals;  // per attribute, sorted by value

  AttributeVector sample(const AttributeSchema& schema, CounterRng& rng) const {
    if (mode == DistributionMode::JointEmpirical) return support[pick(support, rng)].values;
    AttributeVector out(std::vector<double>(schema.slot_count()));
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const auto& pt = marginals[k][pick(marginals[k], rng)];
      std::copy(pt.value.begin(), pt.value.end(), out.slots().begin() + static_cast<long>(schema[k].offset));
    }
    return out;
  }

 private:
  template <typename Points>
  static std::size_t pick(const Points& pts, CounterRng& rng) {
    const double u = rng.uniform();
    double cum = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cum += pts[i].probability;
      if (u < cum) return i;
    }
    return pts.size() - 1;
  }
};

inline DomainDistribution estimate_distribution(const DomainManifest& m, const AttributeSchema& schema,
                                                DistributionMode mode = DistributionMode::JointEmpirical) {
  if (m.empty()) throw DataError("cannot estimate a distribution from an empty manifest");
  const double unit = 1.0 / static_cast<double>(m.size());
  DomainDistribution d;
  d.domain = m.domain;
  d.mode = mode;

  std::map<std::vector<double>, std::size_t> joint;
  std::vector<std::map<std::vector<double>, std::size_t>> per_attr(schema.size());
  for (const auto& ex : m.examples) {
    const auto s = ex.values.slots();
    ++joint[std::vector<double>(s.begin(), s.end())];
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const auto v = schema.value(ex.values, k);
      ++per_attr[k][std::vector<double>(v.begin(), v.end())];
    }
  }
  for (const auto& [v, n] : joint) d.support.push_back({AttributeVector(v), unit * static_cast<double>(n)});
  d.marginals.resize(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k)
    for (const auto& [v, n] : per_attr[k]) d.marginals[k].push_back({v, unit * static_cast<double>(n)});
  return d;
}

inline ValidationResult check_distribution(const DomainDistribution& d, const AttributeSchema& schema,
                                           const AttributePartition& p) {
  ValidationResult r;
  const auto near_one = [](double s) { return std::abs(s - 1.0) <= 1e-9; };
  double total = 0;
  for (const auto& w : d.support) {
    total += w.probability;
    if (!schema.conforms(w.values)) r.violations.push_back({std::nullopt, {}, "support vector does not conform"});
  }
  if (!near_one(total)) r.violations.push_back({std::nullopt, {}, "joint probabilities do not sum to 1"});
  for (std::size_t k = 0; k < d.marginals.size(); ++k) {
    double s = 0;
    for (const auto& pt : d.marginals[k]) s += pt.probability;
    if (!near_one(s)) r.violations.push_back({k, {}, "marginal probabilities do not sum to 1"});
    if (is_fixed_in(p, d.domain, k)) {
      const double want = fixed_value(p, d.domain, k);
      if (d.marginals[k].size() != 1 || d.marginals[k][0].value[0] != want)
        r.violations.push_back({k, {}, "fixed attribute is not degenerate at its fixed value"});
    }
  }
  return r;
}

enum class OracleKind {
  ContentIdentity,
  GuidanceIdentity,
  RandomTarget,
  RandomTriplets,
  StyleCopier,
  ConstantOutput,
  Composite,
};

// A synthetic translator defined directly in attribute space.
struct OracleSpec {
  OracleKind kind = OracleKind::ContentIdentity;
  std::vector<std::size_t> copied;        // StyleCopier
  AttributeVector constant;               // ConstantOutput
  double epsilon = 0;                     // Composite
  std::shared_ptr<const OracleSpec> inner;  // Composite
  std::uint64_t seed = kDefaultSeed;

  static OracleSpec of(OracleKind k) {
    OracleSpec s;
    s.kind = k;
    return s;
  }
  static OracleSpec content_identity() { return of(OracleKind::ContentIdentity); }
  static OracleSpec guidance_identity() { return of(OracleKind::GuidanceIdentity); }
  static OracleSpec random_target() { return of(OracleKind::RandomTarget); }
  static OracleSpec random_triplets() { return of(OracleKind::RandomTriplets); }
  static OracleSpec style_copier(std::vector<std::size_t> attributes) {
    OracleSpec s = of(OracleKind::StyleCopier);
    s.copied = std::move(attributes);
    return s;
  }
  static OracleSpec constant_output(AttributeVector v) {
    OracleSpec s = of(OracleKind::ConstantOutput);
    s.constant = std::move(v);
    return s;
  }
  // Each categorical output attribute is replaced, with probability epsilon,
  // by a different value chosen uniformly.
  static OracleSpec composite(double epsilon, OracleSpec inner) {
    OracleSpec s = of(OracleKind::Composite);
    s.epsilon = epsilon;
    s.seed = inner.seed;
    s.inner = std::make_shared<const OracleSpec>(std::move(inner));
    return s;
  }

  OracleSpec with_seed(std::uint64_t s) const {
    OracleSpec out = *this;
    out.seed = s;
    return out;
  }

  bool deterministic() const {
    switch (kind) {
      case OracleKind::RandomTarget:
      case OracleKind::RandomTriplets: return false;
      case OracleKind::Composite: return epsilon == 0 && inner->deterministic();
      default: return true;
    }
  }

  bool samples_distributions() const {
    if (kind == OracleKind::Composite) return inner->samples_distributions();
    return kind == OracleKind::RandomTarget || kind == OracleKind::RandomTriplets;
  }

  std::string name() const {
    switch (kind) {
      case OracleKind::ContentIdentity: return "content-identity";
      case OracleKind::GuidanceIdentity: return "guidance-identity";
      case OracleKind::RandomTarget: return "random-target";
      case OracleKind::RandomTriplets: return "random-triplets";
      case OracleKind::StyleCopier: return "style-copier";
      case OracleKind::ConstantOutput: return "constant";
      case OracleKind::Composite: return inner->name() + "+noise(" + detail::format_double(epsilon) + ")";
    }
    return "?";
  }
};

inline void validate_oracle(const OracleSpec& s, const AttributeSchema& schema) {
  switch (s.kind) {
    case OracleKind::StyleCopier:
      for (auto k : s.copied)
        if (k >= schema.size()) throw ConfigError("style-copier attribute index out of range");
      break;
    case OracleKind::ConstantOutput:
      if (const auto err = schema.conformance_error(s.constant); !err.empty())
        throw ConfigError("constant oracle output: " + err);
      break;
    case OracleKind::Composite:
      if (!(s.epsilon >= 0 && s.epsilon <= 1)) throw ConfigError("noise epsilon must lie in [0, 1]");
      if (!s.inner) throw ConfigError("composite oracle without an inner oracle");
      validate_oracle(*s.inner, schema);
      break;
    default: break;
  }
}

struct DomainDistributions {
  std::optional<DomainDistribution> a;
  std::optional<DomainDistribution> b;

  const DomainDistribution& get(Domain d) const {
    const auto& x = d == Domain::A ? a : b;
    if (!x) throw ConfigError("sampling oracle needs a distribution for domain " + std::string(to_string(d)));
    return *x;
  }
};

inline AttributeVector apply_oracle(const OracleSpec& s, const AttributeSchema& schema, const AttributePartition& p,
                                    Direction dir, const AttributeVector& y_a, const AttributeVector& y_b,
                                    const DomainDistributions& dists, CounterRng& rng) {
  switch (s.kind) {
    case OracleKind::ContentIdentity: return y_a;
    case OracleKind::GuidanceIdentity: return y_b;
    case OracleKind::RandomTarget: return dists.get(target_of(dir)).sample(schema, rng);
    case OracleKind::RandomTriplets: {
      const Domain d = rng.bernoulli(0.5) ? Domain::A : Domain::B;
      return dists.get(d).sample(schema, rng);
    }
    case OracleKind::StyleCopier: {
      AttributeVector out = y_a;
      for (auto k : s.copied) {
        const auto from = schema.value(y_b, k);
        std::copy(from.begin(), from.end(), out.slots().begin() + static_cast<long>(schema[k].offset));
      }
      const Domain tgt = target_of(dir);
      for (std::size_t k = 0; k < schema.size(); ++k)
        if (is_fixed_in(p, tgt, k)) schema.set_code(out, k, fixed_value(p, tgt, k));
      return out;
    }
    case OracleKind::ConstantOutput: return s.constant;
    case OracleKind::Composite: {
      AttributeVector out = apply_oracle(*s.inner, schema, p, dir, y_a, y_b, dists, rng);
      if (s.epsilon == 0) return out;
      for (std::size_t k = 0; k < schema.size(); ++k) {
        const auto& d = schema[k];
        if (!d.categorical() || !rng.bernoulli(s.epsilon)) continue;
        const auto current = static_cast<std::uint64_t>(schema.code(out, k));
        auto replacement = rng.below(d.cardinality() - 1);
        if (replacement >= current) ++replacement;
        schema.set_code(out, k, static_cast<CategoryCode>(replacement));
      }
      return out;
    }
  }
  return y_a;
}

// Exact per-attribute output distribution of an oracle for one (input, guidance) pair.
struct OutcomeMarginal {
  std::vector<double> category;      // categorical: probability per code
  std::vector<MarginalPoint> points;  // continuous
};

inline std::vector<OutcomeMarginal> outcome_marginals(const OracleSpec& s, const AttributeSchema& schema,
                                                      const AttributePartition& p, Direction dir,
                                                      const AttributeVector& y_a, const AttributeVector& y_b,
                                                      const DomainDistributions& dists) {
  std::vector<OutcomeMarginal> out(schema.size());
  const auto point_mass = [&](const AttributeVector& v) {
    for (std::size_t k = 0; k < schema.size(); ++k) {
      auto& o = out[k];
      const auto& d = schema[k];
      if (d.categorical()) {
        o.category.assign(d.cardinality(), 0.0);
        o.category[static_cast<std::size_t>(schema.code(v, k))] = 1.0;
      } else {
        const auto x = schema.value(v, k);
        o.points = {{std::vector<double>(x.begin(), x.end()), 1.0}};
      }
    }
  };
  const auto mixture = [&](const DomainDistribution& dist, double w) {
    for (std::size_t k = 0; k < schema.size(); ++k) {
      auto& o = out[k];
      if (schema[k].categorical()) {
        o.category.resize(schema[k].cardinality(), 0.0);
        for (const auto& pt : dist.marginals[k]) o.category[static_cast<std::size_t>(pt.value[0])] += w * pt.probability;
      } else {
        for (const auto& pt : dist.marginals[k]) o.points.push_back({pt.value, w * pt.probability});
      }
    }
  };

  switch (s.kind) {
    case OracleKind::ContentIdentity:
    case OracleKind::GuidanceIdentity:
    case OracleKind::StyleCopier:
    case OracleKind::ConstantOutput: {
      CounterRng unused(0, 0);
      point_mass(apply_oracle(s, schema, p, dir, y_a, y_b, dists, unused));
      break;
    }
    case OracleKind::RandomTarget: mixture(dists.get(target_of(dir)), 1.0); break;
    case OracleKind::RandomTriplets:
      mixture(dists.get(Domain::A), 0.5);
      mixture(dists.get(Domain::B), 0.5);
      break;
    case OracleKind::Composite: {
      out = outcome_marginals(*s.inner, schema, p, dir, y_a, y_b, dists);
      for (std::size_t k = 0; k < schema.size(); ++k) {
        if (!schema[k].categorical()) continue;
        const double others = static_cast<double>(schema[k].cardinality() - 1);
        for (auto& pv : out[k].category) pv = (1 - s.epsilon) * pv + s.epsilon * (1 - pv) / others;
      }
      break;
    }
  }
  return out;
}

inline DomainDistributions distributions_for(const OracleSpec& s, const AttributeSchema& schema,
                                             const DomainManifest& ma, const DomainManifest& mb,
                                             DistributionMode mode) {
  DomainDistributions d;
  if (s.samples_distributions()) {
    d.a = estimate_distribution(ma, schema, mode);
    d.b = estimate_distribution(mb, schema, mode);
  }
  return d;
}

enum class Pairing { UniformRandom, Exhaustive };

struct GenerateOptions {
  // Pairs per direction (uniform), or the cap on |source|·|target| (exhaustive).
  std::size_t n_pairs = 1000;
  Pairing pairing = Pairing::UniformRandom;
  DistributionMode mode = DistributionMode::JointEmpirical;
};

// Triplets for both directions, A2B first. Deterministic given (spec.seed, inputs).
inline std::vector<TranslationTriplet> generate_triplets(const OracleSpec& spec, const AttributeSchema& schema,
                                                         const AttributePartition& p, const DomainManifest& ma,
                                                         const DomainManifest& mb, const GenerateOptions& opt = {}) {
  if (opt.n_pairs == 0) throw ConfigError("n_pairs must be at least 1");
  if (ma.empty() || mb.empty()) throw DataError("cannot generate triplets from an empty manifest");
  validate_oracle(spec, schema);
  const auto dists = distributions_for(spec, schema, ma, mb, opt.mode);

  std::vector<TranslationTriplet> out;
  for (const Direction dir : {Direction::A2B, Direction::B2A}) {
    const auto& src = dir == Direction::A2B ? ma : mb;
    const auto& tgt = dir == Direction::A2B ? mb : ma;
    const std::uint64_t base = static_cast<std::uint64_t>(dir) << 40;
    const auto emit = [&](std::size_t i, const LabeledExample& in, const LabeledExample& guide, CounterRng& rng) {
      (void)i;
      TranslationTriplet t;
      t.direction = dir;
      t.y_a = in.values;
      t.y_b = guide.values;
      t.y_hat = apply_oracle(spec, schema, p, dir, in.values, guide.values, dists, rng);
      t.input_id = in.id;
      t.guidance_id = guide.id;
      out.push_back(std::move(t));
    };
    if (opt.pairing == Pairing::Exhaustive) {
      const std::size_t total = src.size() * tgt.size();
      if (total > opt.n_pairs)
        throw ConfigError("exhaustive pairing needs " + std::to_string(total) + " pairs, cap is " +
                          std::to_string(opt.n_pairs));
      for (std::size_t i = 0; i < total; ++i) {
        CounterRng rng(spec.seed, base + i);
        emit(i, src.examples[i / tgt.size()], tgt.examples[i % tgt.size()], rng);
      }
    } else {
      for (std::size_t i = 0; i < opt.n_pairs; ++i) {
        CounterRng rng(spec.seed, base + i);
        const auto& in = src.examples[rng.below(src.size())];
        const auto& guide = tgt.examples[rng.below(tgt.size())];
        emit(i, in, guide, rng);
      }
    }
  }
  return out;
}

struct BruteForceOptions {
  std::size_t max_pairs = 1'000'000;
  double bias_threshold = kDefaultBiasThreshold;
};

// Exact expectations of every metric under uniform pairing: enumerates each
// (input, guidance) pair and the oracle's exact output distribution, then
// applies the conditioning and macro-averaging rules. Per-attribute weights are
// in units of pairs, so deterministic oracles yield integer counts.
inline MetricReport expected_metrics_bruteforce(const OracleSpec& spec, const AttributeSchema& schema,
                                                const AttributePartition& p, const DomainManifest& ma,
                                                const DomainManifest& mb, const BruteForceOptions& opt = {}) {
  if (ma.empty() || mb.empty()) throw DataError("cannot enumerate an empty manifest");
  if (ma.size() * mb.size() > opt.max_pairs)
    throw ConfigError("brute-force enumeration of " + std::to_string(ma.size() * mb.size()) +
                      " pairs exceeds the cap of " + std::to_string(opt.max_pairs));
  validate_oracle(spec, schema);
  const auto dists = distributions_for(spec, schema, ma, mb, DistributionMode::JointEmpirical);

  std::optional<DirectionReport> reports[2];
  for (const Direction dir : {Direction::A2B, Direction::B2A}) {
    const Domain src = source_of(dir);
    const Domain tgt = target_of(dir);
    const auto& sources = dir == Direction::A2B ? ma : mb;
    const auto& targets = dir == Direction::A2B ? mb : ma;

    // cells[metric][k] = {conditioned weight, event weight}
    std::vector<std::vector<std::pair<double, double>>> cells(4, std::vector<std::pair<double, double>>(schema.size()));
    DirectionReport r;
    r.direction = dir;

    for (const auto& in : sources.examples) {
      for (const auto& guide : targets.examples) {
        r.triplets += 1;
        bool member = true;
        for (std::size_t k = 0; k < schema.size(); ++k) {
          if (is_fixed_in(p, src, k) && schema.code(in.values, k) != fixed_value(p, src, k)) member = false;
          if (is_fixed_in(p, tgt, k) && schema.code(guide.values, k) != fixed_value(p, tgt, k)) member = false;
        }
        if (!member) r.membership_violations += 1;

        const auto outcome = outcome_marginals(spec, schema, p, dir, in.values, guide.values, dists);
        for (std::size_t k = 0; k < schema.size(); ++k) {
          const Role role = attribute_role(p, k);
          const auto a = schema.value(in.values, k);
          const auto b = schema.value(guide.values, k);
          const bool equal = std::equal(a.begin(), a.end(), b.begin());
          if (!schema[k].categorical()) {
            if (equal) continue;
            double closer = 0;
            for (const auto& pt : outcome[k].points)
              if (channel_distance(pt.value, a) < channel_distance(pt.value, b)) closer += pt.probability;
            auto& c = cells[static_cast<std::size_t>(Metric::ContentPreservation)][k];
            c.first += 1;
            c.second += closer;
            continue;
          }
          // Correct output value y*_k for this attribute.
          double correct;
          Metric when_different;
          if (role == Role::Shared) {
            correct = a[0];
            when_different = Metric::ContentPreservation;
          } else if (role == specific_role(tgt)) {
            correct = b[0];
            when_different = Metric::StyleTransfer;
          } else {
            correct = fixed_value(p, tgt, k);
            when_different = Metric::TranslationQuality;
          }
          const double p_correct = outcome[k].category[static_cast<std::size_t>(correct)];
          if (!equal) {
            auto& c = cells[static_cast<std::size_t>(when_different)][k];
            c.first += 1;
            c.second += p_correct;
          } else if (role != Role::DomainSplitting) {
            auto& c = cells[static_cast<std::size_t>(Metric::Bias)][k];
            c.first += 1;
            c.second += 1 - p_correct;
          }
        }
      }
    }

    for (const Metric m : kAllMetrics) {
      std::vector<std::size_t> ks;
      for (std::size_t k = 0; k < schema.size(); ++k) {
        const Role role = attribute_role(p, k);
        switch (m) {
          case Metric::TranslationQuality:
            if (role == Role::DomainSplitting || role == specific_role(src)) ks.push_back(k);
            break;
          case Metric::ContentPreservation:
            if (role == Role::Shared) ks.push_back(k);
            break;
          case Metric::StyleTransfer:
            if (role == specific_role(tgt)) ks.push_back(k);
            break;
          case Metric::Bias:
            if (role != Role::DomainSplitting && schema[k].categorical()) ks.push_back(k);
            break;
        }
      }
      double sum = 0;
      std::size_t defined = 0;
      for (auto k : ks) {
        const auto& c = cells[static_cast<std::size_t>(m)][k];
        r.per_attribute.push_back({m, k, c.first, c.second});
        if (c.first > 0) {
          sum += 100.0 * c.second / c.first;
          ++defined;
        }
      }
      std::optional<double> v;
      if (defined) v = sum / static_cast<double>(defined);
      switch (m) {
        case Metric::TranslationQuality: r.q_tr = v; break;
        case Metric::ContentPreservation: r.d_c = v; break;
        case Metric::StyleTransfer: r.d_s = v; break;
        case Metric::Bias: r.bias = v; break;
      }
    }
    reports[static_cast<std::size_t>(dir)] = std::move(r);
  }
  return assemble_report(std::move(reports[0]), std::move(reports[1]), opt.bias_threshold);
}

}  // namespace ummi
