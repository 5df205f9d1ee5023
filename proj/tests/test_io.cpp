#include <gtest/gtest.h>

#include "support.hpp"
#include "ummi/fixtures.hpp"
#include "ummi/io.hpp"
#include "ummi/oracles.hpp"

using namespace ummi;
using ummi::test::vec;

namespace {

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Corpus, CsvWithInferredSchema) {
  const auto c = parse_csv_corpus(
      "id,shape,hue,pose.0,pose.1\n"
      "x1,cube,3,0.5,1\n"
      "x2,ball,0,-2,4.25\n"
      "\"x,3\",cube,7,1e-3,0\n");
  ASSERT_EQ(c.examples.size(), 3u);
  EXPECT_EQ(c.examples[2].id, "x,3");
  ASSERT_EQ(c.schema.size(), 3u);
  EXPECT_EQ(c.schema[0].labels, (std::vector<std::string>{"ball", "cube"}));
  EXPECT_EQ(c.schema[1].cardinality(), 8u);
  EXPECT_FALSE(c.schema[2].categorical());
  EXPECT_EQ(c.schema[2].channels, 2u);
  EXPECT_EQ(c.examples[1].values, vec({0, 0, -2, 4.25}));
}

TEST(Corpus, CsvAgainstSchema) {
  const auto schema = parse_schema("shape = categorical(cube, ball)\nhue = categorical(8)\n");
  const auto c = parse_csv_corpus("hue,id,shape\n3,a,ball\n0,b,cube\n", schema);
  EXPECT_EQ(c.examples[0].values, vec({1, 3}));
  EXPECT_NE(error_of([&] { parse_csv_corpus("id,shape\na,ball\n", schema); }).find("schema mismatch"),
            std::string::npos);
  const auto e = error_of([&] { parse_csv_corpus("id,shape,hue\na,ball,1\nb,cone,2\n", schema); });
  EXPECT_NE(e.find("line 3"), std::string::npos) << e;
  EXPECT_NE(e.find("cone"), std::string::npos) << e;
  EXPECT_THROW(parse_csv_corpus("shape,hue\nball,1\n", schema), DataError);
  EXPECT_THROW(parse_csv_corpus("id,shape,hue\na,ball\n", schema), DataError);
}

TEST(Corpus, CelebaAttrFile) {
  const std::string text =
      "3\n"
      "Smiling Male Young\n"
      "000001.jpg  1 -1  1\n"
      "000002.jpg -1  1  1\n"
      "000003.jpg -1 -1 -1\n";
  const auto c = parse_celeba_attr(text);
  ASSERT_EQ(c.examples.size(), 3u);
  EXPECT_EQ(c.examples[0].id, "000001.jpg");
  EXPECT_EQ(c.examples[0].values, vec({1, 0, 1}));
  EXPECT_EQ(c.examples[2].values, vec({0, 0, 0}));

  const auto schema = parse_schema("Male = categorical(2)\nSmiling = categorical(2)\n");
  const auto sub = parse_celeba_attr(text, schema);
  EXPECT_EQ(sub.examples[1].values, vec({1, 0}));

  const auto zero = error_of([&] { parse_celeba_attr("1\nSmiling Male\n000001.jpg 1 0\n"); });
  EXPECT_NE(zero.find("line 3"), std::string::npos) << zero;
  const auto missing =
      error_of([&] { parse_celeba_attr(text, parse_schema("Bald = categorical(2)\n")); });
  EXPECT_NE(missing.find("schema mismatch"), std::string::npos) << missing;
  EXPECT_THROW(parse_celeba_attr("4\nSmiling\n000001.jpg 1\n"), DataError);
  EXPECT_THROW(parse_celeba_attr("1\nSmiling Male\n000001.jpg 1\n"), DataError);
}

TEST(Corpus, JsonlForms) {
  const auto keyed = parse_jsonl_corpus(
      "{\"id\":\"a\",\"shape\":\"cube\",\"pose\":[1,2,3]}\n"
      "{\"id\":\"b\",\"shape\":\"ball\",\"pose\":[4,5,6]}\n",
      parse_schema("shape = categorical(cube, ball)\npose = continuous(3)\n"));
  ASSERT_EQ(keyed.examples.size(), 2u);
  EXPECT_EQ(keyed.examples[1].values, vec({1, 4, 5, 6}));

  const auto schema = parse_schema("x = categorical(4)\n");
  const auto arrays = parse_jsonl_corpus("{\"id\":\"p\",\"values\":[3]}\n", schema);
  EXPECT_EQ(arrays.examples[0].values, vec({3}));
  EXPECT_THROW(parse_jsonl_corpus("{\"id\":\"p\",\"values\":[3]}\n"), DataError);
  EXPECT_NE(error_of([&] { parse_jsonl_corpus("{\"id\":\"p\",\"values\":[3]}\n{oops\n", schema); }).find("line 2"),
            std::string::npos);
}

TEST(Manifest, RoundTrip) {
  const auto s = test::shipped("synaction");
  auto m = fixtures::synthesize_domain(s.schema, s.config, Domain::B, 20, 4);
  m.partition_hash = partition_hash(s.schema, s.config);
  m.provenance.source = "synthetic";
  m.provenance.filtered_at = "2021-10-14T00:00:00Z";
  const auto text = serialize_manifest(m, s.schema);
  const auto back = parse_manifest(text);
  EXPECT_EQ(back.manifest, m);
  EXPECT_EQ(serialize_schema(back.schema), serialize_schema(s.schema));
  EXPECT_EQ(serialize_manifest(back.manifest, back.schema), text);

  const auto as_corpus = parse_jsonl_corpus(text);
  EXPECT_EQ(as_corpus.examples, m.examples);
  EXPECT_THROW(parse_manifest(""), DataError);
  EXPECT_THROW(parse_manifest("{\"manifest\":{\"domain\":\"C\"}}\n"), DataError);
}

TEST(Triplets, JsonlAndCsvRoundTrip) {
  const auto s = test::shipped("synaction");
  const auto a = fixtures::synthesize_domain(s.schema, s.config, Domain::A, 6, 9);
  const auto b = fixtures::synthesize_domain(s.schema, s.config, Domain::B, 6, 9);
  auto ts = generate_triplets(OracleSpec::random_triplets(), s.schema, s.partition(), a, b, {25});
  ts[3].y_a_gt = ts[3].y_a;
  ts[3].y_b_gt = ts[3].y_b;

  const TripletFileHeader header{"abcdef0123456789", "random-triplets", 17};
  const auto jsonl = serialize_triplets_jsonl(ts, s.schema, header);
  const auto back = parse_triplets_jsonl(jsonl, s.schema);
  EXPECT_EQ(back.triplets, ts);
  EXPECT_EQ(back.header.partition_hash, header.partition_hash);
  EXPECT_EQ(back.header.oracle, header.oracle);
  EXPECT_EQ(back.header.seed, header.seed);

  ts[3].y_a_gt.reset();
  ts[3].y_b_gt.reset();
  const auto csv = serialize_triplets_csv(ts, s.schema);
  EXPECT_EQ(parse_triplets_csv(csv, s.schema), ts);
  EXPECT_EQ(serialize_triplets_csv(parse_triplets_csv(csv, s.schema), s.schema), csv);

  for (auto& t : ts) {
    t.y_a_gt = t.y_b;
    t.y_b_gt = t.y_a;
  }
  EXPECT_EQ(parse_triplets_csv(serialize_triplets_csv(ts, s.schema), s.schema), ts);
}

TEST(Triplets, Malformed) {
  const auto schema = parse_schema("x = categorical(4)\n");
  EXPECT_THROW(parse_triplets_jsonl("{\"direction\":\"A2C\",\"y_a\":[0],\"y_b\":[1],\"y_hat\":[1]}\n", schema), DataError);
  EXPECT_THROW(parse_triplets_jsonl("{\"direction\":\"A2B\",\"y_a\":[0],\"y_b\":[9],\"y_hat\":[1]}\n", schema), DataError);
  EXPECT_THROW(parse_triplets_csv("direction,a_x,b_x\nA2B,0,1\n", schema), DataError);
}

TEST(Files, ReadMissingFileIsADataError) {
  EXPECT_THROW(read_file("/nonexistent/ummi/file"), DataError);
}
