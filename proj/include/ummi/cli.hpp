#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ummi/error.hpp"
#include "ummi/fixtures.hpp"
#include "ummi/io.hpp"
#include "ummi/metrics.hpp"
#include "ummi/oracles.hpp"
#include "ummi/pose.hpp"
#include "ummi/report.hpp"
#include "ummi/selfcheck.hpp"
#include "ummi/splitter.hpp"

#ifndef UMMI_CONFIG_DIR
#define UMMI_CONFIG_DIR "configs"
#endif

namespace ummi::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string subcommand;

  // Inputs. `dataset` names a shipped config pair in `config_dir` and fills
  // whichever of schema/partition is not given explicitly.
  std::string dataset;
  fs::path config_dir = UMMI_CONFIG_DIR;
  fs::path schema;
  fs::path partition;
  std::string corpus;  // a path, or builtin:3dshapes
  std::string corpus_format;
  fs::path manifest_a;
  fs::path manifest_b;
  fs::path triplets;
  std::vector<fs::path> reports;
  fs::path out = "ummi-out";

  // Oracle.
  std::string oracle = "guidance-identity";
  double epsilon = 0;
  std::vector<std::string> copy;
  std::string constant;
  std::size_t pairs = 1000;
  std::string pairing = "uniform";
  std::string distribution_mode = "joint";
  std::uint64_t seed = kDefaultSeed;

  // Evaluation and reporting.
  double bias_threshold = kDefaultBiasThreshold;
  std::string labels = "as-given";
  std::string name;
  std::vector<std::string> formats = {"markdown", "csv", "json"};
  int precision = 1;
  std::string gray_open = "<span class=gray>";
  std::string gray_close = "</span>";
  bool per_attribute = false;
  std::string pose_attribute;
  std::size_t workers = 1;
};

struct Inputs {
  AttributeSchema schema;
  PartitionConfig config;
  std::string hash;
};

namespace detail {

inline std::string utc_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    const auto v = ummi::detail::parse_int(epoch);
    if (!v) throw ConfigError("SOURCE_DATE_EPOCH is not an integer");
    t = static_cast<std::time_t>(*v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string read_config(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError("cannot read '" + path.string() + "'");
  return read_file(path);
}

inline Inputs load_inputs(const RunConfig& c) {
  fs::path schema_path = c.schema, partition_path = c.partition;
  if (!c.dataset.empty()) {
    if (schema_path.empty()) schema_path = c.config_dir / (c.dataset + ".schema");
    if (partition_path.empty()) partition_path = c.config_dir / (c.dataset + ".partition");
  }
  if (schema_path.empty()) throw ConfigError(c.subcommand + " needs --schema or --dataset");
  if (partition_path.empty()) throw ConfigError(c.subcommand + " needs --partition or --dataset");
  Inputs in;
  in.schema = parse_schema(read_config(schema_path));
  in.config = validated(in.schema, parse_partition(read_config(partition_path), in.schema));
  in.hash = partition_hash(in.schema, in.config);
  return in;
}

inline std::string dataset_name(const RunConfig& c, const Inputs& in) {
  if (!c.dataset.empty()) return c.dataset;
  return in.config.name;
}

inline DomainManifest load_domain(const fs::path& path, const Inputs& in, Domain expected) {
  const auto loaded = parse_manifest(read_file(path));
  if (!(loaded.schema == in.schema)) throw DataError("'" + path.string() + "' was built with a different schema");
  if (loaded.manifest.partition_hash != in.hash)
    throw DataError("'" + path.string() + "' was built under partition " + loaded.manifest.partition_hash +
                    ", expected " + in.hash);
  if (loaded.manifest.domain != expected)
    throw DataError("'" + path.string() + "' holds domain " + std::string(to_string(loaded.manifest.domain)));
  const auto check = verify_manifest(loaded.manifest, in.schema, in.config.partition);
  if (!check.ok()) throw DataError("'" + path.string() + "' fails verification: " + check.summary());
  return loaded.manifest;
}

inline std::vector<std::size_t> attribute_list(const AttributeSchema& schema, const AttributePartition& p,
                                               const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& raw : names) {
    const auto n = ummi::detail::trim(raw);
    if (n.empty()) continue;
    if (n == "specific") {
      out.insert(out.end(), p.specific_a.begin(), p.specific_a.end());
      out.insert(out.end(), p.specific_b.begin(), p.specific_b.end());
    } else if (const auto k = schema.index_of(n)) {
      out.push_back(*k);
    } else {
      throw ConfigError("unknown attribute '" + std::string(n) + "' in --copy");
    }
  }
  return out;
}

inline OracleSpec oracle_from_config(const RunConfig& c, const Inputs& in) {
  const auto& p = in.config.partition;
  OracleSpec spec;
  if (c.oracle == "content-identity") spec = OracleSpec::content_identity();
  else if (c.oracle == "guidance-identity") spec = OracleSpec::guidance_identity();
  else if (c.oracle == "random-target") spec = OracleSpec::random_target();
  else if (c.oracle == "random-triplets") spec = OracleSpec::random_triplets();
  else if (c.oracle == "style-copier")
    spec = OracleSpec::style_copier(attribute_list(in.schema, p, c.copy.empty() ? std::vector<std::string>{"specific"} : c.copy));
  else if (c.oracle == "constant") {
    if (c.constant.empty()) throw ConfigError("--oracle constant needs --constant");
    try {
      spec = OracleSpec::constant_output(ummi::detail::vector_from_json(in.schema, nlohmann::json::parse(c.constant)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("--constant is not a JSON array: ") + e.what());
    } catch (const DataError& e) {
      throw ConfigError(std::string("--constant: ") + e.what());
    }
  } else {
    throw ConfigError("unknown oracle '" + c.oracle + "'");
  }
  if (!(c.epsilon >= 0 && c.epsilon <= 1)) throw ConfigError("--epsilon must lie in [0, 1]");
  if (c.epsilon > 0) spec = OracleSpec::composite(c.epsilon, spec);
  return spec.with_seed(c.seed);
}

inline Pairing pairing_from_name(const std::string& s) {
  if (s == "uniform") return Pairing::UniformRandom;
  if (s == "exhaustive") return Pairing::Exhaustive;
  throw ConfigError("--pairing must be uniform or exhaustive");
}

inline DistributionMode mode_from_name(const std::string& s) {
  if (s == "joint") return DistributionMode::JointEmpirical;
  if (s == "marginals") return DistributionMode::IndependentMarginals;
  throw ConfigError("--distribution-mode must be joint or marginals");
}

inline LabelSource labels_from_name(const std::string& s) {
  if (s == "as-given") return LabelSource::AsGiven;
  if (s == "ground-truth") return LabelSource::GroundTruth;
  throw ConfigError("--labels must be as-given or ground-truth");
}

inline std::vector<ReportFormat> formats_of(const RunConfig& c) {
  std::vector<ReportFormat> out;
  for (const auto& f : c.formats) out.push_back(report_format_from_name(f));
  return out;
}

inline std::string extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::Csv: return ".csv";
    case ReportFormat::Json: return ".json";
    case ReportFormat::Markdown: return ".md";
  }
  return "";
}

inline void write_document(const RunConfig& c, const ReportDocument& doc, std::ostream& out) {
  for (const auto f : formats_of(c)) {
    const auto bytes = emit_report(doc, f);
    write_file(c.out / ("report" + extension(f)), bytes);
    if (f == ReportFormat::Markdown) out << bytes;
  }
}

inline int cmd_split(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto in = load_inputs(c);
  if (c.corpus.empty()) throw ConfigError("split needs --corpus");
  std::vector<LabeledExample> corpus;
  std::string source = c.corpus;
  if (c.corpus == "builtin:3dshapes") {
    if (!(fixtures::three_d_shapes_schema() == in.schema))
      throw ConfigError("builtin:3dshapes needs the shipped 3D-Shapes schema");
    corpus = fixtures::three_d_shapes_grid();
  } else if (c.corpus.rfind("builtin:", 0) == 0) {
    throw ConfigError("unknown built-in corpus '" + c.corpus + "'");
  } else {
    const fs::path path = c.corpus;
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw ConfigError("cannot read corpus '" + c.corpus + "'");
    const auto format = c.corpus_format.empty() ? guess_corpus_format(path) : corpus_format_from_name(c.corpus_format);
    auto loaded = load_corpus(path, format, in.schema);
    corpus = std::move(loaded.examples);
  }

  const auto split = build_split(corpus, in.schema, in.config, {source, utc_timestamp()});
  const auto stats = split_stats(split.a, split.b, in.schema, in.config.partition);
  write_file(c.out / "A.jsonl", serialize_manifest(split.a, in.schema));
  write_file(c.out / "B.jsonl", serialize_manifest(split.b, in.schema));
  write_file(c.out / "A.ids", serialize_id_list(split.a));
  write_file(c.out / "B.ids", serialize_id_list(split.b));
  std::string ids;
  for (const auto& id : split.overlapping_ids) ids += id + "\n";
  write_file(c.out / "overlap.ids", ids);

  std::string text = "partition " + in.hash + "\n";
  text += "corpus " + source + " (" + std::to_string(corpus.size()) + " records)\n";
  text += "prefiltered_out " + std::to_string(split.prefiltered_out) + "\n";
  text += "overlap " + std::to_string(split.overlapping_ids.size()) + " (" +
          (in.config.overlap == OverlapPolicy::KeepBoth ? "keep_both" : "exclude") + ")\n";
  text += "A " + std::to_string(split.a.size()) + "\n";
  text += "B " + std::to_string(split.b.size()) + "\n";
  text += "attribute,role,distinct_a,distinct_b,varies_a,varies_b\n";
  for (const auto& v : stats.attributes) {
    text += in.schema[v.attribute].name + "," + std::string(to_string(v.role)) + "," +
            std::to_string(v.values_a.size()) + "," + std::to_string(v.values_b.size()) + "," +
            (v.varies_in_a ? "yes" : "no") + "," + (v.varies_in_b ? "yes" : "no") + "\n";
  }
  for (const auto& w : split.warnings) text += "warning: " + w + "\n";
  for (const auto& w : stats.warnings) text += "warning: " + w + "\n";
  write_file(c.out / "split_stats.txt", text);

  for (const auto& w : split.warnings) err << "warning: " << w << "\n";
  for (const auto& w : stats.warnings) err << "warning: " << w << "\n";
  out << "A: " << split.a.size() << "\nB: " << split.b.size() << "\n";
  return 0;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto in = load_inputs(c);
  const auto spec = oracle_from_config(c, in);
  const auto ma = load_domain(c.manifest_a.empty() ? c.out / "A.jsonl" : c.manifest_a, in, Domain::A);
  const auto mb = load_domain(c.manifest_b.empty() ? c.out / "B.jsonl" : c.manifest_b, in, Domain::B);
  GenerateOptions gen{c.pairs, pairing_from_name(c.pairing), mode_from_name(c.distribution_mode)};
  const auto triplets = generate_triplets(spec, in.schema, in.config.partition, ma, mb, gen);
  const fs::path path = c.triplets.empty() ? c.out / "triplets.jsonl" : c.triplets;
  if (path.extension() == ".csv") write_file(path, serialize_triplets_csv(triplets, in.schema));
  else write_file(path, serialize_triplets_jsonl(triplets, in.schema, {in.hash, spec.name(), c.seed}));
  out << triplets.size() << " triplets (" << spec.name() << ") -> " << path.string() << "\n";
  return 0;
}

inline int cmd_eval(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto in = load_inputs(c);
  if (c.triplets.empty()) throw ConfigError("eval needs --triplets");
  std::error_code ec;
  if (!fs::is_regular_file(c.triplets, ec)) throw ConfigError("cannot read triplets '" + c.triplets.string() + "'");
  const auto text = read_file(c.triplets);
  LoadedTriplets loaded;
  if (c.triplets.extension() == ".csv") loaded.triplets = parse_triplets_csv(text, in.schema);
  else loaded = parse_triplets_jsonl(text, in.schema);
  if (!loaded.header.partition_hash.empty() && loaded.header.partition_hash != in.hash)
    throw DataError("triplets were generated under partition " + loaded.header.partition_hash + ", expected " + in.hash);
  if (loaded.triplets.empty()) throw DataError("no triplets in '" + c.triplets.string() + "'");

  EvalOptions opt{c.bias_threshold, labels_from_name(c.labels), c.workers};
  const auto report = evaluate(loaded.triplets, in.schema, in.config.partition, opt);
  for (const auto* d : {&report.a2b, &report.b2a})
    if (*d && d->value().membership_violations > 0)
      err << "warning: " << d->value().membership_violations << " " << to_string(d->value().direction)
          << " triplets violate the domain predicates\n";

  auto doc = make_document(dataset_name(c, in), in.schema, in.config);
  doc.formatting = {c.precision, c.gray_open, c.gray_close};
  const std::string name = !c.name.empty() ? c.name : !loaded.header.oracle.empty() ? loaded.header.oracle : "model";
  doc.rows.push_back({name, report});
  write_document(c, doc, out);

  if (c.per_attribute) {
    write_file(c.out / "per_attribute.md", emit_per_attribute_report(report, doc.attributes, ReportFormat::Markdown, c.precision));
    write_file(c.out / "per_attribute.csv", emit_per_attribute_report(report, doc.attributes, ReportFormat::Csv, c.precision));
  }
  if (!c.pose_attribute.empty()) {
    const auto k = in.schema.index_of(c.pose_attribute);
    if (!k) throw ConfigError("unknown pose attribute '" + c.pose_attribute + "'");
    const auto pose = pose_report(loaded.triplets, in.schema, *k);
    const auto md = emit_pose_report({{name, pose}});
    write_file(c.out / "pose.md", md);
    out << md;
  }

  bool undefined = false;
  for (const auto* d : {&report.a2b, &report.b2a})
    if (*d)
      for (const Metric m : {Metric::TranslationQuality, Metric::ContentPreservation, Metric::StyleTransfer})
        if (!d->value().value(m) && !metric_attributes(in.schema, in.config.partition, m, d->value().direction).empty())
          undefined = true;
  if (report.a2b && report.b2a && (!report.overall.d || !report.overall.bias)) undefined = true;
  if (undefined) {
    err << "error: a headline metric is undefined (empty conditioning set)\n";
    return static_cast<int>(ExitCode::MetricUndefined);
  }
  return 0;
}

inline int cmd_report(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.reports.empty()) throw ConfigError("report needs at least one JSON report");
  std::optional<ReportDocument> doc;
  for (const auto& path : c.reports) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw ConfigError("cannot read report '" + path.string() + "'");
    auto next = parse_report_json(read_file(path));
    if (!doc) doc = std::move(next);
    else merge_documents(*doc, next);
  }
  doc->formatting = {c.precision, c.gray_open, c.gray_close};
  write_document(c, *doc, out);
  return 0;
}

inline int cmd_selfcheck(const RunConfig& c, std::ostream& out, std::ostream&) {
  SelfcheckOptions opt;
  opt.config_dir = c.config_dir;
  opt.seed = c.seed;
  const bool ok = run_selfcheck(out, opt);
  out << (ok ? "selfcheck passed\n" : "selfcheck FAILED\n");
  return ok ? 0 : static_cast<int>(ExitCode::SelfcheckFailed);
}

}  // namespace detail

// Runs one subcommand; errors are reported on `err` and mapped to exit codes.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.subcommand == "split") return detail::cmd_split(c, out, err);
    if (c.subcommand == "simulate") return detail::cmd_simulate(c, out, err);
    if (c.subcommand == "eval") return detail::cmd_eval(c, out, err);
    if (c.subcommand == "report") return detail::cmd_report(c, out, err);
    if (c.subcommand == "selfcheck") return detail::cmd_selfcheck(c, out, err);
    throw ConfigError("unknown subcommand '" + c.subcommand + "'");
  } catch (const UndefinedMetricError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::MetricUndefined);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::DataError);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::ConfigError);
  }
}

}  // namespace ummi::cli
