#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"
#include "ummi/fixtures.hpp"
#include "ummi/oracles.hpp"

using namespace ummi;
using ummi::test::vec;

namespace {

std::vector<TranslationTriplet> shapes_triplets(const OracleSpec& spec, std::size_t n) {
  const auto s = test::shipped("3dshapes");
  const auto a = fixtures::synthesize_domain(s.schema, s.config, Domain::A, 40, 21);
  const auto b = fixtures::synthesize_domain(s.schema, s.config, Domain::B, 40, 21);
  return generate_triplets(spec, s.schema, s.partition(), a, b, {n});
}

const OracleSpec kMixed = OracleSpec::composite(0.2, OracleSpec::random_triplets());

}  // namespace

TEST(Properties, TripletOrderDoesNotMatter) {
  const auto s = test::shipped("3dshapes");
  auto ts = shapes_triplets(kMixed, 3000);
  const auto base = evaluate(ts, s.schema, s.partition());
  std::mt19937 rng(99);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(ts.begin(), ts.end(), rng);
    EXPECT_EQ(evaluate(ts, s.schema, s.partition()), base);
  }
}

TEST(Properties, WorkersDoNotChangeResults) {
  const auto s = test::shipped("3dshapes");
  const auto ts = shapes_triplets(kMixed, 5001);
  const auto one = evaluate(ts, s.schema, s.partition());
  for (std::size_t w : {2u, 4u, 7u}) {
    EvalOptions opt;
    opt.workers = w;
    EXPECT_EQ(evaluate(ts, s.schema, s.partition(), opt), one) << w;
  }
}

// Any bijective recoding of an attribute's codes, applied to the data and the
// fixed values alike, leaves every score unchanged.
TEST(Properties, RelabelingIsInvisible) {
  const auto s = test::shipped("3dshapes");
  const auto ts = shapes_triplets(kMixed, 3000);
  const auto base = evaluate(ts, s.schema, s.partition());
  std::mt19937 rng(5);
  for (const char* name : {"floor_hue", "orientation", "shape"}) {
    const auto k = s.schema.require_index(name);
    std::vector<CategoryCode> perm(s.schema[k].cardinality());
    std::iota(perm.begin(), perm.end(), CategoryCode{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    auto p = s.partition();
    for (auto* fixed : {&p.fixed_in_a, &p.fixed_in_b})
      if (auto it = fixed->find(k); it != fixed->end()) it->second = perm[it->second];
    auto relabeled = ts;
    for (auto& t : relabeled)
      for (auto* v : {&t.y_a, &t.y_b, &t.y_hat}) s.schema.set_code(*v, k, perm[s.schema.code(*v, k)]);
    EXPECT_EQ(evaluate(relabeled, s.schema, p), base) << name;
  }
}

// For every categorical attribute outside the domain split, each triplet
// lands either in the attribute's headline metric or in B.
TEST(Properties, ConditioningSetsPartitionTheTriplets) {
  const auto s = test::shipped("3dshapes");
  const auto ts = shapes_triplets(kMixed, 4000);
  const auto r = evaluate(ts, s.schema, s.partition());
  for (const auto* d : {&*r.a2b, &*r.b2a}) {
    const Direction dir = d->direction;
    for (std::size_t k = 0; k < s.schema.size(); ++k) {
      const Role role = attribute_role(s.partition(), k);
      const auto* bias = d->find(Metric::Bias, k);
      ASSERT_NE(bias, nullptr);
      if (role == Role::Shared) {
        EXPECT_EQ(d->find(Metric::ContentPreservation, k)->conditioned + bias->conditioned, d->triplets);
      } else if (role == specific_role(target_of(dir))) {
        EXPECT_EQ(d->find(Metric::StyleTransfer, k)->conditioned + bias->conditioned, d->triplets);
      } else {
        EXPECT_EQ(d->find(Metric::TranslationQuality, k)->conditioned + bias->conditioned, d->triplets);
      }
    }
    EXPECT_EQ(d->triplets, 4000);
  }
}

// Two shared attributes with very different conditioning sizes: the headline
// is the mean of per-attribute percentages, not the pooled ratio.
TEST(Properties, MacroAverageNotMicro) {
  const auto s = parse_schema("d = categorical(2)\nrare = categorical(2)\ncommon = categorical(10)\n");
  const auto cfg = validated(s, parse_partition(
                                    "domain_splitting = d\nsplit_values = 0, 1\nshared = rare, common\nspecific_a =\n"
                                    "specific_b =\n",
                                    s));
  std::vector<TranslationTriplet> ts;
  const auto add = [&](double ra, double rb, double ca, double cb, double rh, double ch) {
    TranslationTriplet t;
    t.y_a = vec({0, ra, ca});
    t.y_b = vec({1, rb, cb});
    t.y_hat = vec({1, rh, ch});
    ts.push_back(t);
  };
  // rare differs in 2 triplets, both preserved; common differs in all 10, 1 preserved.
  for (int i = 0; i < 10; ++i) {
    const double ra = i < 2 ? 0 : 1, rb = 1;
    const double ca = i, cb = (i + 1) % 10;
    add(ra, rb, ca, cb, ra, i == 0 ? ca : cb);
  }
  const auto r = evaluate(ts, s, cfg.partition);
  const auto* rare = r.a2b->find(Metric::ContentPreservation, 1);
  const auto* common = r.a2b->find(Metric::ContentPreservation, 2);
  ASSERT_EQ(rare->conditioned, 2);
  ASSERT_EQ(rare->events, 2);
  ASSERT_EQ(common->conditioned, 10);
  ASSERT_EQ(common->events, 1);
  const double macro = (100.0 + 10.0) / 2;
  const double micro = 100.0 * 3 / 12;
  EXPECT_NE(macro, micro);
  EXPECT_DOUBLE_EQ(*r.a2b->d_c, macro);
}

TEST(Properties, SimulationIsSeedStable) {
  EXPECT_EQ(shapes_triplets(kMixed, 500), shapes_triplets(kMixed, 500));
  EXPECT_NE(shapes_triplets(kMixed, 500), shapes_triplets(kMixed.with_seed(1), 500));
}
