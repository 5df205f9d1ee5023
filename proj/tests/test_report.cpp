#include <gtest/gtest.h>

#include "support.hpp"
#include "ummi/fixtures.hpp"
#include "ummi/oracles.hpp"
#include "ummi/report.hpp"

using namespace ummi;

namespace {

struct Toy {
  AttributeSchema schema = fixtures::toy_schema();
  PartitionConfig config = validated(schema, fixtures::toy_partition(schema));
  DomainManifest a = fixtures::synthesize_domain(schema, config, Domain::A, 6, 5);
  DomainManifest b = fixtures::synthesize_domain(schema, config, Domain::B, 6, 5);

  MetricReport run(const OracleSpec& spec) const {
    return expected_metrics_bruteforce(spec, schema, config.partition, a, b);
  }
  ReportDocument doc() const { return make_document("toy", schema, config); }
};

MetricReport handmade(double q, double ds_a2b, double ds_b2a, double dc, double b) {
  DirectionReport x, y;
  x.direction = Direction::A2B;
  y.direction = Direction::B2A;
  x.q_tr = y.q_tr = q;
  x.d_s = ds_a2b;
  y.d_s = ds_b2a;
  x.d_c = y.d_c = dc;
  x.bias = y.bias = b;
  x.triplets = y.triplets = 10;
  return assemble_report(x, y, kDefaultBiasThreshold);
}

std::string line_with(const std::string& text, const std::string& needle) {
  const auto at = text.find(needle);
  if (at == std::string::npos) return "";
  const auto start = text.rfind('\n', at) + 1;
  return text.substr(start, text.find('\n', at) - start);
}

}  // namespace

TEST(Report, ContentIdentityRow) {
  const Toy t;
  auto doc = t.doc();
  doc.rows.push_back({"Content-idt", t.run(OracleSpec::content_identity())});
  const auto md = emit_report(doc, ReportFormat::Markdown);
  EXPECT_EQ(line_with(md, "Content-idt"), "| Content-idt | 0.0 | 50.0 | 0.0 | 0.0 | 100.0 | 0.0 |");
  EXPECT_NE(md.find("| Model | Q_tr ↑ | D ↑ | D_s^A2B ↑ | D_s^B2A ↑ | D_c ↑ | B ↓ |"), std::string::npos);
  EXPECT_NE(md.find("Dataset: toy (partition " + doc.partition_hash + ")"), std::string::npos);
}

TEST(Report, GrayMarkerWrapsAllButBias) {
  auto doc = Toy().doc();
  doc.rows.push_back({"collapsed", handmade(12.0, 40.0, 60.0, 20.0, 55.0)});
  doc.rows.push_back({"fine", handmade(12.0, 40.0, 60.0, 20.0, 30.0)});
  doc.formatting.gray_open = "[";
  doc.formatting.gray_close = "]";
  const auto md = emit_report(doc, ReportFormat::Markdown);
  EXPECT_EQ(line_with(md, "collapsed"), "| collapsed | [12.0] | [35.0] | [40.0] | [60.0] | [20.0] | 55.0 |");
  // The threshold is strict.
  EXPECT_EQ(line_with(md, "fine"), "| fine | 12.0 | 35.0 | 40.0 | 60.0 | 20.0 | 30.0 |");
  EXPECT_NE(emit_report(doc, ReportFormat::Csv).find("collapsed,overall,b,,55,,,true"), std::string::npos);
}

TEST(Report, PrecisionAndUndefinedCells) {
  auto doc = Toy().doc();
  auto r = handmade(66.66666, 50.0, 50.0, 50.0, 0.0);
  r.b2a->d_s.reset();
  r.overall = aggregate(r.a2b, r.b2a);
  doc.rows.push_back({"m", r});
  doc.formatting.precision = 2;
  EXPECT_EQ(line_with(emit_report(doc, ReportFormat::Markdown), "| m |"), "| m | 66.67 | — | 50.00 | — | 50.00 | 0.00 |");
  doc.formatting.precision = 0;
  EXPECT_THROW(emit_report(doc, ReportFormat::Markdown), ConfigError);
  EXPECT_THROW(emit_per_attribute_report(r, doc.attributes, ReportFormat::Markdown, 0), ConfigError);
  EXPECT_THROW(report_format_from_name("html"), ConfigError);
}

TEST(Report, EmissionIsDeterministicAndJsonRoundTrips) {
  const Toy t;
  auto doc = t.doc();
  doc.rows.push_back({"guidance", t.run(OracleSpec::guidance_identity())});
  doc.rows.push_back({"random", t.run(OracleSpec::random_target())});
  doc.rows.push_back({"noisy", t.run(OracleSpec::composite(0.3, OracleSpec::content_identity()))});
  auto copy = doc;
  for (const auto f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown})
    EXPECT_EQ(emit_report(doc, f), emit_report(copy, f));
  const auto json = emit_report(doc, ReportFormat::Json);
  const auto back = parse_report_json(json);
  EXPECT_EQ(back, doc);
  EXPECT_EQ(emit_report(back, ReportFormat::Json), json);
  EXPECT_THROW(parse_report_json("{\"rows\": 3}"), DataError);
  EXPECT_THROW(parse_report_json("not json"), DataError);
}

TEST(Report, MergeChecksPartition) {
  const Toy t;
  auto x = t.doc();
  x.rows.push_back({"one", t.run(OracleSpec::content_identity())});
  auto y = t.doc();
  y.rows.push_back({"two", t.run(OracleSpec::guidance_identity())});
  merge_documents(x, y);
  ASSERT_EQ(x.rows.size(), 2u);
  EXPECT_EQ(x.rows[1].name, "two");
  const auto s = test::shipped("3dshapes");
  EXPECT_THROW(merge_documents(x, make_document("3dshapes", s.schema, s.config)), DataError);
}

TEST(Report, PerAttributeTable) {
  const Toy t;
  const auto r = t.run(OracleSpec::content_identity());
  const auto doc = t.doc();
  const auto md = emit_per_attribute_report(r, doc.attributes);
  EXPECT_NE(md.find("| Group | Attribute |"), std::string::npos);
  // Content identity preserves content and transfers no style.
  EXPECT_NE(line_with(md, "| content |").find("| D_c / D_c | 100.0 |"), std::string::npos) << md;
  EXPECT_NE(line_with(md, "| angle |").find("| 100.0 |"), std::string::npos) << md;
  EXPECT_NE(line_with(md, "| style_b |").find("| D_s / Q_tr | 0.0 |"), std::string::npos) << md;
  auto empty = r;
  for (auto* d : {&*empty.a2b, &*empty.b2a})
    for (auto& cell : d->per_attribute)
      if (cell.attribute == 3 && cell.metric == Metric::Bias) cell.conditioned = cell.events = 0;
  EXPECT_NE(line_with(emit_per_attribute_report(empty, doc.attributes), "| style_a |").find("| — | 0 |"),
            std::string::npos);
  // Groups come in a fixed order.
  EXPECT_LT(md.find("Domain-splitting"), md.find("Content"));
  EXPECT_LT(md.find("Content"), md.find("A-specific"));
  EXPECT_LT(md.find("A-specific"), md.find("B-specific"));

  const auto csv = emit_per_attribute_report(r, doc.attributes, ReportFormat::Csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "group,attribute,metric_a2b,a2b,n_a2b,metric_b2a,b2a,n_b2a,b,n_b");
}

TEST(Report, PoseTable) {
  PoseReport p;
  p.mean_abs_delta = {1.0, 2.0, 3.0};
  p.mean_distance = 2.0;
  p.match_fraction = 0.5;
  p.triplets = 4;
  const auto md = emit_pose_report({{"model", p}});
  EXPECT_NE(md.find("| Model | Y ↓ | P ↓ | R ↓ | D_p ↓ | PM ↑ |"), std::string::npos);
  EXPECT_NE(md.find("| model | 1.00 | 2.00 | 3.00 | 2.00 | 0.50 |"), std::string::npos) << md;
}
