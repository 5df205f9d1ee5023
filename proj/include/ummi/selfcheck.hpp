#pragma once

#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ummi/fixtures.hpp"
#include "ummi/io.hpp"
#include "ummi/metrics.hpp"
#include "ummi/oracles.hpp"

namespace ummi {

struct Discrepancy {
  std::string where;
  std::optional<double> got;
  std::optional<double> want;
  double tolerance = 0;
};

namespace detail {
inline std::string show(std::optional<double> v) { return v ? format_double(*v) : std::string("undefined"); }
}  // namespace detail

inline std::string describe(const Discrepancy& d) {
  return d.where + ": got " + detail::show(d.got) + ", expected " + detail::show(d.want) + " (tolerance " +
         detail::format_double(d.tolerance) + ")";
}

// Compares a streamed report against exact expectations. With `exact`, values
// must be bit-identical. Otherwise each per-attribute rate may deviate by
// `sigmas` binomial standard errors (n taken from the streamed count), and each
// macro average by the mean of its components' tolerances, which bounds the
// standard error of a mean of correlated estimates.
inline std::vector<Discrepancy> compare_reports(const MetricReport& streamed, const MetricReport& expected,
                                                bool exact, double sigmas = 3.0) {
  constexpr double kSlack = 1e-9;
  std::vector<Discrepancy> out;
  const auto check = [&](std::string where, std::optional<double> got, std::optional<double> want, double tol) {
    if (got.has_value() != want.has_value()) {
      out.push_back({std::move(where), got, want, tol});
      return;
    }
    if (!got) return;
    const bool ok = exact ? *got == *want : std::abs(*got - *want) <= tol + kSlack;
    if (!ok) out.push_back({std::move(where), got, want, tol});
  };

  double tol_dir[2][4] = {};
  for (const Direction dir : {Direction::A2B, Direction::B2A}) {
    const auto& s = streamed.direction(dir);
    const auto& e = expected.direction(dir);
    const std::string tag(to_string(dir));
    if (s.has_value() != e.has_value()) {
      out.push_back({tag + " presence", std::nullopt, std::nullopt, 0});
      continue;
    }
    if (!s) continue;
    for (const Metric m : kAllMetrics) {
      double tol_sum = 0;
      std::size_t defined = 0;
      for (const auto& ec : e->per_attribute) {
        if (ec.metric != m) continue;
        const auto* sc = s->find(m, ec.attribute);
        const auto got = sc ? sc->percent() : std::nullopt;
        const auto want = ec.percent();
        double tol = 0;
        if (want && sc && sc->conditioned > 0) {
          const double p = *want / 100.0;
          tol = sigmas * 100.0 * std::sqrt(std::max(0.0, p * (1 - p)) / sc->conditioned);
          tol_sum += tol;
          ++defined;
        }
        check(tag + " " + std::string(to_string(m)) + "[" + std::to_string(ec.attribute) + "]", got, want, tol);
      }
      const double tol = defined ? tol_sum / static_cast<double>(defined) : 0;
      tol_dir[static_cast<int>(dir)][static_cast<int>(m)] = tol;
      check(tag + " " + std::string(to_string(m)), s->value(m), e->value(m), tol);
    }
  }
  const auto avg = [&](Metric m) {
    return (tol_dir[0][static_cast<int>(m)] + tol_dir[1][static_cast<int>(m)]) / 2;
  };
  check("overall q_tr", streamed.overall.q_tr, expected.overall.q_tr, avg(Metric::TranslationQuality));
  check("overall d_c", streamed.overall.d_c, expected.overall.d_c, avg(Metric::ContentPreservation));
  check("overall d", streamed.overall.d, expected.overall.d,
        (avg(Metric::ContentPreservation) + avg(Metric::StyleTransfer)) / 2);
  check("overall b", streamed.overall.bias, expected.overall.bias, avg(Metric::Bias));
  return out;
}

// The table values of the two identity poles.
struct PoleValues {
  double q_tr, d, d_s_a2b, d_s_b2a, d_c, bias;
};
inline constexpr PoleValues kContentIdentityPole{0, 50, 0, 0, 100, 0};
inline constexpr PoleValues kGuidanceIdentityPole{100, 50, 100, 100, 0, 0};

inline std::vector<Discrepancy> compare_to_pole(const MetricReport& r, const PoleValues& want) {
  std::vector<Discrepancy> out;
  const auto check = [&](const char* where, std::optional<double> got, double w) {
    if (!got || *got != w) out.push_back({where, got, w, 0});
  };
  check("q_tr", r.overall.q_tr, want.q_tr);
  check("d", r.overall.d, want.d);
  check("d_s A2B", r.a2b ? r.a2b->d_s : std::nullopt, want.d_s_a2b);
  check("d_s B2A", r.b2a ? r.b2a->d_s : std::nullopt, want.d_s_b2a);
  check("d_c", r.overall.d_c, want.d_c);
  check("b", r.overall.bias, want.bias);
  return out;
}

struct ToyCase {
  std::string name;
  AttributeSchema schema;
  PartitionConfig config;
  DomainManifest a;
  DomainManifest b;
};

inline ToyCase make_toy_case(std::string name, AttributeSchema schema, PartitionConfig config, std::size_t n,
                             std::uint64_t seed) {
  ToyCase c{std::move(name), std::move(schema), std::move(config), {}, {}};
  c.a = fixtures::synthesize_domain(c.schema, c.config, Domain::A, n, seed);
  c.b = fixtures::synthesize_domain(c.schema, c.config, Domain::B, n, seed);
  return c;
}

// The built-in oracles, one of each kind, for a given partition.
inline std::vector<OracleSpec> builtin_oracles(const AttributeSchema& schema, const AttributePartition& p,
                                               std::uint64_t seed = kDefaultSeed) {
  std::vector<std::size_t> specific = p.specific_a;
  specific.insert(specific.end(), p.specific_b.begin(), p.specific_b.end());
  AttributeVector constant(std::vector<double>(schema.slot_count(), 0.0));
  return {OracleSpec::content_identity().with_seed(seed),
          OracleSpec::guidance_identity().with_seed(seed),
          OracleSpec::random_target().with_seed(seed),
          OracleSpec::random_triplets().with_seed(seed),
          OracleSpec::style_copier(specific).with_seed(seed),
          OracleSpec::constant_output(constant).with_seed(seed),
          OracleSpec::composite(0.1, OracleSpec::guidance_identity()).with_seed(seed)};
}

struct SelfcheckOptions {
  std::filesystem::path config_dir;
  std::size_t toy_examples = 12;
  std::size_t streamed_pairs = 50'000;
  std::uint64_t seed = kDefaultSeed;
};

// Pole suite plus brute-force-vs-streamed consistency on toy fixtures. Writes
// one line per check; returns true when every check passed.
inline bool run_selfcheck(std::ostream& log, const SelfcheckOptions& opt = {}) {
  std::vector<ToyCase> cases;
  {
    auto schema = fixtures::toy_schema();
    auto cfg = fixtures::toy_partition(schema);
    cases.push_back(make_toy_case("toy", std::move(schema), std::move(cfg), opt.toy_examples, opt.seed));
  }
  bool ok = true;
  const auto report = [&](const std::string& what, const std::vector<Discrepancy>& bad) {
    log << (bad.empty() ? "ok   " : "FAIL ") << what << "\n";
    for (const auto& d : bad) log << "       " << describe(d) << "\n";
    ok = ok && bad.empty();
  };
  if (!opt.config_dir.empty()) {
    for (const char* name : {"3dshapes", "synaction", "celeba_d"}) {
      try {
        auto schema = parse_schema(read_file(opt.config_dir / (std::string(name) + ".schema")));
        auto cfg = validated(schema, parse_partition(read_file(opt.config_dir / (std::string(name) + ".partition")), schema));
        cases.push_back(make_toy_case(name, std::move(schema), std::move(cfg), opt.toy_examples, opt.seed));
      } catch (const Error& e) {
        log << "FAIL load " << name << ": " << e.what() << "\n";
        ok = false;
      }
    }
  }

  for (const auto& c : cases) {
    const auto& p = c.config.partition;
    const std::size_t all_pairs = c.a.size() * c.b.size();
    GenerateOptions exhaustive{all_pairs, Pairing::Exhaustive, DistributionMode::JointEmpirical};
    for (const auto& [spec, pole] : {std::pair{OracleSpec::content_identity(), kContentIdentityPole},
                                     std::pair{OracleSpec::guidance_identity(), kGuidanceIdentityPole}}) {
      const auto triplets = generate_triplets(spec, c.schema, p, c.a, c.b, exhaustive);
      report(c.name + " pole " + spec.name(), compare_to_pole(evaluate(triplets, c.schema, p), pole));
    }
    for (const auto& spec : builtin_oracles(c.schema, p, opt.seed)) {
      const auto expected = expected_metrics_bruteforce(spec, c.schema, p, c.a, c.b);
      const bool exact = spec.deterministic();
      GenerateOptions gen = exact ? exhaustive : GenerateOptions{opt.streamed_pairs};
      const auto triplets = generate_triplets(spec, c.schema, p, c.a, c.b, gen);
      report(c.name + " brute-force " + spec.name() + (exact ? " (exact)" : " (3 sigma)"),
             compare_reports(evaluate(triplets, c.schema, p), expected, exact));
    }
  }
  return ok;
}

}  // namespace ummi
