#include <gtest/gtest.h>

#include "support.hpp"
#include "ummi/fixtures.hpp"
#include "ummi/metrics.hpp"

using namespace ummi;
using ummi::test::vec;

namespace {

TranslationTriplet make(Direction d, AttributeVector a, AttributeVector b, AttributeVector hat) {
  TranslationTriplet t;
  t.direction = d;
  t.y_a = std::move(a);
  t.y_b = std::move(b);
  t.y_hat = std::move(hat);
  return t;
}

// Shared c (3 values) and A-specific s (3 values, fixed to 0 in B); B has no
// specific attributes.
test::Shipped one_fixed_attribute() {
  test::Shipped s;
  s.schema = parse_schema("c = categorical(3)\ns = categorical(3)\n");
  s.config = validated(s.schema, parse_partition("shared = c\nspecific_a = s\nspecific_b =\nfixed_in_b.s = 0\n", s.schema));
  return s;
}

}  // namespace

TEST(PerfectAttributes, FourAttributeExamples) {
  const auto s = test::four_attribute_setup();
  EXPECT_EQ(perfect_attributes(s.schema, s.partition(), Direction::A2B, vec({0, 5, 7, 2}), vec({1, 9, 8, 4})),
            vec({1, 5, 8, 4}));
  EXPECT_EQ(perfect_attributes(s.schema, s.partition(), Direction::B2A, vec({1, 9, 8, 4}), vec({0, 5, 7, 2})),
            vec({0, 9, 7, 2}));
}

TEST(PerfectAttributes, ThreeDShapesExample) {
  const auto s = test::shipped("3dshapes");
  const auto& sc = s.schema;
  const auto v = [&](const char* shape, const char* hue, const char* floor, const char* wall, const char* size,
                     const char* orient) {
    AttributeVector out(std::vector<double>(6));
    const char* labels[] = {shape, hue, floor, wall, size, orient};
    for (std::size_t k = 0; k < 6; ++k) sc.set_code(out, k, *sc.code_of(k, labels[k]));
    return out;
  };
  const auto input = v("cube", "green", "orange", "purple", "5", "-30");
  const auto guide = v("cube", "teal", "red", "blue", "7", "0");
  EXPECT_EQ(perfect_attributes(sc, s.partition(), Direction::A2B, input, guide),
            v("cube", "green", "red", "blue", "7", "0"));
}

TEST(PerfectAttributes, ContinuousSharedCopiedVerbatim) {
  const auto s = test::shipped("synaction");
  const auto y_a = vec({10.5, -3, 7, 4, 0});
  const auto y_b = vec({1, 2, 3, 0, 6});
  EXPECT_EQ(perfect_attributes(s.schema, s.partition(), Direction::A2B, y_a, y_b), vec({10.5, -3, 7, 0, 6}));
}

TEST(AttributeMatch, CategoricalAndContinuous) {
  AttributeSchema s;
  s.add_categorical("c", 5);
  s.add_continuous("yaw");
  const double three[] = {3}, ten[] = {10}, twelve[] = {12}, forty[] = {40}, twenty[] = {20}, thirty[] = {30},
               tf[] = {25};
  EXPECT_TRUE(attribute_match(s, 0, three, three));
  EXPECT_TRUE(attribute_match(s, 1, ten, twelve, std::span<const double>(forty)));
  EXPECT_FALSE(attribute_match(s, 1, tf, twenty, std::span<const double>(thirty)));
  EXPECT_THROW(attribute_match(s, 1, ten, twelve), std::invalid_argument);
}

TEST(AttributeMatch, MultiChannelUsesMeanDistance) {
  AttributeSchema s;
  s.add_continuous("pose", 3);
  const double out[] = {0, 0, 0}, in[] = {9, 0, 0}, guide[] = {4, 4, 4};
  // Mean distances 3 vs 4: closer to the input despite the larger yaw gap.
  EXPECT_TRUE(attribute_match(s, 0, out, in, std::span<const double>(guide)));
}

// Four triplets, one fixed attribute; the conditioning set holds three of them
// and two of those match: 2/3.
TEST(TranslationQuality, HandEnumeration) {
  const auto s = one_fixed_attribute();
  const std::vector<TranslationTriplet> ts = {
      make(Direction::A2B, vec({0, 1}), vec({1, 0}), vec({0, 0})),
      make(Direction::A2B, vec({1, 2}), vec({2, 0}), vec({1, 0})),
      make(Direction::A2B, vec({2, 1}), vec({0, 0}), vec({2, 1})),
      make(Direction::A2B, vec({0, 0}), vec({1, 0}), vec({0, 2})),
  };
  const auto q = translation_quality(ts, s.schema, s.partition());
  EXPECT_NEAR(q.value, 66.7, 0.05);
  EXPECT_DOUBLE_EQ(q.value, 200.0 / 3.0);
  ASSERT_EQ(q.per_attribute.size(), 1u);
  EXPECT_EQ(q.per_attribute[0].conditioned, 3);
  EXPECT_EQ(q.per_attribute[0].events, 2);

  // The fourth triplet (y_a,s = y_b,s) enters B instead; its output changes s.
  const auto b = bias(ts, s.schema, s.partition());
  const auto* cell = &b.per_attribute_a2b[1];
  EXPECT_EQ(cell->attribute, 1u);
  EXPECT_EQ(cell->conditioned, 1);
  EXPECT_EQ(cell->events, 1);
}

TEST(Metrics, IdentityPolesOnFourAttributeSetup) {
  const auto s = test::four_attribute_setup();
  const std::vector<std::pair<AttributeVector, AttributeVector>> pairs = {
      {vec({0, 5, 7, 2}), vec({1, 9, 8, 4})}, {vec({0, 1, 3, 2}), vec({1, 1, 8, 0})}, {vec({0, 2, 8, 2}), vec({1, 3, 8, 2})}};
  std::vector<TranslationTriplet> content, guidance;
  for (const auto& [a, b] : pairs) {
    content.push_back(make(Direction::A2B, a, b, a));
    guidance.push_back(make(Direction::A2B, a, b, b));
    content.push_back(make(Direction::B2A, b, a, b));
    guidance.push_back(make(Direction::B2A, b, a, a));
  }
  const auto c = evaluate(content, s.schema, s.partition());
  const auto g = evaluate(guidance, s.schema, s.partition());
  EXPECT_EQ(c.overall.q_tr, 0.0);
  EXPECT_EQ(c.overall.d, 50.0);
  EXPECT_EQ(c.a2b->d_s, 0.0);
  EXPECT_EQ(c.b2a->d_s, 0.0);
  EXPECT_EQ(c.overall.d_c, 100.0);
  EXPECT_EQ(c.overall.bias, 0.0);
  EXPECT_EQ(g.overall.q_tr, 100.0);
  EXPECT_EQ(g.overall.d, 50.0);
  EXPECT_EQ(g.a2b->d_s, 100.0);
  EXPECT_EQ(g.b2a->d_s, 100.0);
  EXPECT_EQ(g.overall.d_c, 0.0);
  EXPECT_EQ(g.overall.bias, 0.0);
}

TEST(Metrics, ContinuousContentUsesNearestMatch) {
  const auto s = test::shipped("synaction");
  const auto a = vec({0, 0, 0, 3, 0});
  const auto b = vec({30, 30, 30, 0, 5});
  const std::vector<TranslationTriplet> ts = {
      make(Direction::A2B, a, b, vec({10, 10, 10, 0, 5})),  // 10 vs 20: preserved
      make(Direction::A2B, a, b, vec({15, 15, 15, 0, 5})),  // tie: not preserved
      make(Direction::A2B, a, b, vec({29, 29, 29, 0, 5})),  // nearer the guidance
      make(Direction::A2B, a, a, vec({0, 0, 0, 0, 5})),     // identical poses: not conditioned
  };
  const auto d = content_preservation(ts, s.schema, s.partition());
  ASSERT_EQ(d.per_attribute.size(), 1u);
  EXPECT_EQ(d.per_attribute[0].conditioned, 3);
  EXPECT_EQ(d.per_attribute[0].events, 1);
  // Continuous attributes never enter B.
  const auto r = evaluate(ts, s.schema, s.partition());
  EXPECT_EQ(r.a2b->find(Metric::Bias, 0), nullptr);
}

TEST(Metrics, StyleTransferConditionsOnGuidanceDiffering) {
  const auto s = test::four_attribute_setup();
  const std::vector<TranslationTriplet> ts = {
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({1, 9, 8, 4}), vec({1, 5, 8, 4})),
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({1, 9, 8, 3}), vec({1, 5, 8, 2})),
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({1, 9, 8, 2}), vec({1, 5, 8, 1})),
  };
  const auto d = style_transfer(ts, s.schema, s.partition());
  EXPECT_EQ(d.per_attribute[0].conditioned, 2);
  EXPECT_DOUBLE_EQ(d.value, 50.0);
}

TEST(Metrics, ErrorsAndUndefined) {
  const auto s = test::four_attribute_setup();
  EXPECT_THROW(translation_quality({}, s.schema, s.partition()), std::invalid_argument);
  const std::vector<TranslationTriplet> mixed = {
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({1, 9, 8, 4}), vec({1, 5, 8, 4})),
      make(Direction::B2A, vec({1, 9, 8, 4}), vec({0, 5, 7, 2}), vec({0, 9, 7, 2}))};
  EXPECT_THROW(content_preservation(mixed, s.schema, s.partition()), std::invalid_argument);
  // Shared attribute equal in every triplet: D_c has an empty conditioning set.
  const std::vector<TranslationTriplet> same = {
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({1, 5, 8, 4}), vec({1, 5, 8, 4}))};
  EXPECT_THROW(content_preservation(same, s.schema, s.partition()), UndefinedMetricError);
  const auto r = evaluate(same, s.schema, s.partition());
  EXPECT_FALSE(r.a2b->d_c);
  EXPECT_EQ(r.a2b->find(Metric::ContentPreservation, 1)->conditioned, 0);
  EXPECT_FALSE(r.a2b->find(Metric::ContentPreservation, 1)->percent());
  const std::vector<TranslationTriplet> bad = {make(Direction::A2B, vec({0, 5, 7}), vec({1, 5, 8, 4}), vec({1, 5, 8, 4}))};
  EXPECT_THROW(evaluate(bad, s.schema, s.partition()), DataError);
}

TEST(Metrics, MembershipViolationsAreCounted) {
  const auto s = test::four_attribute_setup();
  const std::vector<TranslationTriplet> ts = {
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({1, 9, 8, 4}), vec({1, 5, 8, 4})),
      make(Direction::A2B, vec({0, 5, 7, 3}), vec({1, 9, 8, 4}), vec({1, 5, 8, 4})),
      make(Direction::A2B, vec({0, 5, 7, 2}), vec({0, 9, 8, 4}), vec({1, 5, 8, 4}))};
  const auto r = evaluate(ts, s.schema, s.partition());
  EXPECT_EQ(r.a2b->triplets, 3);
  EXPECT_EQ(r.a2b->membership_violations, 2);
}

TEST(Metrics, GroundTruthLabels) {
  const auto s = test::four_attribute_setup();
  auto t = make(Direction::A2B, vec({0, 1, 7, 2}), vec({1, 9, 8, 4}), vec({1, 5, 8, 4}));
  EvalOptions gt;
  gt.labels = LabelSource::GroundTruth;
  EXPECT_THROW(evaluate(std::vector{t}, s.schema, s.partition(), gt), DataError);
  t.y_a_gt = vec({0, 5, 7, 2});
  t.y_b_gt = vec({1, 9, 8, 4});
  const auto given = evaluate(std::vector{t}, s.schema, s.partition());
  const auto truth = evaluate(std::vector{t}, s.schema, s.partition(), gt);
  EXPECT_EQ(given.a2b->d_c, 0.0);
  EXPECT_EQ(truth.a2b->d_c, 100.0);
}

TEST(Aggregate, FormulasAndThreshold) {
  DirectionReport a, b;
  a.q_tr = 90;
  b.q_tr = 70;
  a.d_s = 80;
  b.d_s = 60;
  a.d_c = 40;
  b.d_c = 20;
  a.bias = 35;
  b.bias = 30;
  const auto g = aggregate(a, b);
  EXPECT_EQ(g.q_tr, 80.0);
  EXPECT_EQ(g.d_c, 30.0);
  EXPECT_EQ(g.d, (80.0 + 60 + 40 + 20) / 4);
  EXPECT_EQ(g.bias, 32.5);
  EXPECT_TRUE(g.low_confidence);
  EXPECT_FALSE(aggregate(a, b, 40).low_confidence);
  b.bias.reset();
  EXPECT_EQ(aggregate(a, b).bias, 35.0);
  EXPECT_THROW(aggregate(a, std::nullopt), std::invalid_argument);
}

TEST(Aggregate, ContentPoleAverageIsHundred) {
  DirectionReport a, b;
  a.d_c = b.d_c = 100;
  a.d_s = b.d_s = 0;
  EXPECT_EQ(aggregate(a, b).d_c, 100.0);
  EXPECT_EQ(aggregate(a, b).d, 50.0);
}

TEST(Metrics, ValuesStayInRange) {
  const auto s = test::shipped("3dshapes");
  const auto a = fixtures::synthesize_domain(s.schema, s.config, Domain::A, 30, 5);
  const auto b = fixtures::synthesize_domain(s.schema, s.config, Domain::B, 30, 5);
  std::vector<TranslationTriplet> ts;
  CounterRng rng(1, 1);
  for (std::size_t i = 0; i < 400; ++i) {
    const auto& x = a.examples[rng.below(a.size())].values;
    const auto& y = b.examples[rng.below(b.size())].values;
    AttributeVector hat(std::vector<double>(6));
    for (std::size_t k = 0; k < 6; ++k) s.schema.set_code(hat, k, static_cast<CategoryCode>(rng.below(s.schema[k].cardinality())));
    ts.push_back(make(Direction::A2B, x, y, hat));
    ts.push_back(make(Direction::B2A, y, x, hat));
  }
  const auto r = evaluate(ts, s.schema, s.partition());
  for (const auto* d : {&*r.a2b, &*r.b2a})
    for (const auto& c : d->per_attribute)
      if (const auto v = c.percent()) {
        EXPECT_GE(*v, 0.0);
        EXPECT_LE(*v, 100.0);
      }
}
