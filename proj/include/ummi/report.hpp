#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ummi/detail/text.hpp"
#include "ummi/error.hpp"
#include "ummi/io.hpp"
#include "ummi/metrics.hpp"
#include "ummi/partition.hpp"
#include "ummi/pose.hpp"

namespace ummi {

enum class ReportFormat { Csv, Json, Markdown };

inline ReportFormat report_format_from_name(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + std::string(s) + "'");
}

struct AttributeInfo {
  std::string name;
  Role role = Role::Shared;
  friend bool operator==(const AttributeInfo&, const AttributeInfo&) = default;
};

struct ReportFormatting {
  int precision = 1;
  std::string gray_open = "<span class=gray>";
  std::string gray_close = "</span>";
  friend bool operator==(const ReportFormatting&, const ReportFormatting&) = default;
};

struct ReportRow {
  std::string name;
  MetricReport report;
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportDocument {
  std::string dataset;
  std::string partition_hash;
  std::vector<AttributeInfo> attributes;
  std::vector<ReportRow> rows;
  ReportFormatting formatting;
  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

inline ReportDocument make_document(std::string dataset, const AttributeSchema& schema, const PartitionConfig& cfg) {
  ReportDocument doc;
  doc.dataset = std::move(dataset);
  doc.partition_hash = partition_hash(schema, cfg);
  for (std::size_t k = 0; k < schema.size(); ++k)
    doc.attributes.push_back({schema[k].name, attribute_role(cfg.partition, k)});
  return doc;
}

// Appends the rows of `other`; both must describe the same partition.
inline void merge_documents(ReportDocument& into, const ReportDocument& other) {
  if (into.partition_hash != other.partition_hash)
    throw DataError("cannot merge reports computed under different partitions (" + into.partition_hash + " vs " +
                    other.partition_hash + ")");
  into.rows.insert(into.rows.end(), other.rows.begin(), other.rows.end());
}

namespace detail {

inline std::string cell(std::optional<double> v, int precision) {
  if (!v) return "—";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

inline std::string raw(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

inline ordered_json opt_json(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

inline std::optional<double> json_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

inline std::string_view role_key(Role r) {
  switch (r) {
    case Role::DomainSplitting: return "domain_splitting";
    case Role::Shared: return "shared";
    case Role::SpecificA: return "specific_a";
    case Role::SpecificB: return "specific_b";
  }
  return "?";
}

inline Role role_from_key(std::string_view s) {
  if (s == "domain_splitting") return Role::DomainSplitting;
  if (s == "shared") return Role::Shared;
  if (s == "specific_a") return Role::SpecificA;
  if (s == "specific_b") return Role::SpecificB;
  throw DataError("unknown role '" + std::string(s) + "'");
}

inline Metric metric_from_key(std::string_view s) {
  for (const Metric m : kAllMetrics)
    if (to_string(m) == s) return m;
  throw DataError("unknown metric '" + std::string(s) + "'");
}

inline void check_precision(const ReportFormatting& f) {
  if (f.precision < 1) throw ConfigError("report precision must be at least one decimal");
}

inline std::string attribute_name(const ReportDocument& doc, std::size_t k) {
  return k < doc.attributes.size() ? doc.attributes[k].name : std::to_string(k);
}

inline std::string emit_markdown(const ReportDocument& doc) {
  const int prec = doc.formatting.precision;
  std::string out = "Dataset: " + (doc.dataset.empty() ? std::string("-") : doc.dataset) +
                    " (partition " + doc.partition_hash + ")\n\n";
  out += "| Model | Q_tr ↑ | D ↑ | D_s^A2B ↑ | D_s^B2A ↑ | D_c ↑ | B ↓ |\n";
  out += "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& row : doc.rows) {
    const auto& r = row.report;
    const auto ds = [&](Direction d) -> std::optional<double> {
      const auto& x = r.direction(d);
      return x ? x->d_s : std::nullopt;
    };
    const auto wrap = [&](std::string s) {
      return r.overall.low_confidence ? doc.formatting.gray_open + s + doc.formatting.gray_close : s;
    };
    out += "| " + row.name + " | " + wrap(cell(r.overall.q_tr, prec)) + " | " + wrap(cell(r.overall.d, prec)) +
           " | " + wrap(cell(ds(Direction::A2B), prec)) + " | " + wrap(cell(ds(Direction::B2A), prec)) + " | " +
           wrap(cell(r.overall.d_c, prec)) + " | " + cell(r.overall.bias, prec) + " |\n";
  }
  return out;
}

inline std::string emit_csv(const ReportDocument& doc) {
  std::string out = "model,scope,metric,attribute,value,n,events,low_confidence\n";
  const auto line = [&out](const std::string& model, std::string_view scope, std::string_view metric,
                           const std::string& attr, const std::string& value, const std::string& n,
                           const std::string& events, bool low) {
    out += csv_escape(model) + "," + std::string(scope) + "," + std::string(metric) + "," + csv_escape(attr) + "," +
           value + "," + n + "," + events + "," + (low ? "true" : "false") + "\n";
  };
  for (const auto& row : doc.rows) {
    const auto& r = row.report;
    const bool low = r.overall.low_confidence;
    line(row.name, "overall", "q_tr", "", raw(r.overall.q_tr), "", "", low);
    line(row.name, "overall", "d", "", raw(r.overall.d), "", "", low);
    line(row.name, "overall", "d_c", "", raw(r.overall.d_c), "", "", low);
    line(row.name, "overall", "b", "", raw(r.overall.bias), "", "", low);
    for (const Direction dir : {Direction::A2B, Direction::B2A}) {
      const auto& d = r.direction(dir);
      if (!d) continue;
      for (const Metric m : kAllMetrics)
        line(row.name, to_string(dir), to_string(m), "", raw(d->value(m)), format_double(d->triplets), "", low);
      for (const auto& a : d->per_attribute)
        line(row.name, to_string(dir), to_string(a.metric), attribute_name(doc, a.attribute), raw(a.percent()),
             format_double(a.conditioned), format_double(a.events), low);
    }
  }
  return out;
}

inline ordered_json direction_json(const DirectionReport& d, const ReportDocument& doc) {
  ordered_json j;
  j["triplets"] = d.triplets;
  j["membership_violations"] = d.membership_violations;
  j["q_tr"] = opt_json(d.q_tr);
  j["d_s"] = opt_json(d.d_s);
  j["d_c"] = opt_json(d.d_c);
  j["b"] = opt_json(d.bias);
  j["per_attribute"] = ordered_json::array();
  for (const auto& a : d.per_attribute) {
    ordered_json cellj;
    cellj["metric"] = std::string(to_string(a.metric));
    cellj["attribute"] = a.attribute;
    cellj["name"] = attribute_name(doc, a.attribute);
    cellj["n"] = a.conditioned;
    cellj["events"] = a.events;
    cellj["score"] = opt_json(a.percent());
    j["per_attribute"].push_back(std::move(cellj));
  }
  return j;
}

inline std::string emit_json(const ReportDocument& doc) {
  ordered_json j;
  j["dataset"] = doc.dataset;
  j["partition_hash"] = doc.partition_hash;
  j["precision"] = doc.formatting.precision;
  j["gray_open"] = doc.formatting.gray_open;
  j["gray_close"] = doc.formatting.gray_close;
  j["attributes"] = ordered_json::array();
  for (const auto& a : doc.attributes) j["attributes"].push_back({{"name", a.name}, {"role", role_key(a.role)}});
  j["rows"] = ordered_json::array();
  for (const auto& row : doc.rows) {
    const auto& r = row.report;
    ordered_json rj;
    rj["name"] = row.name;
    rj["q_tr"] = opt_json(r.overall.q_tr);
    rj["d"] = opt_json(r.overall.d);
    rj["d_c"] = opt_json(r.overall.d_c);
    rj["b"] = opt_json(r.overall.bias);
    rj["low_confidence"] = r.overall.low_confidence;
    rj["bias_threshold"] = r.bias_threshold;
    rj["directions"] = ordered_json::object();
    for (const Direction dir : {Direction::A2B, Direction::B2A})
      if (const auto& d = r.direction(dir)) rj["directions"][std::string(to_string(dir))] = direction_json(*d, doc);
    j["rows"].push_back(std::move(rj));
  }
  return j.dump(2) + "\n";
}

}  // namespace detail

// Byte-deterministic for a given document.
inline std::string emit_report(const ReportDocument& doc, ReportFormat format) {
  detail::check_precision(doc.formatting);
  switch (format) {
    case ReportFormat::Csv: return detail::emit_csv(doc);
    case ReportFormat::Json: return detail::emit_json(doc);
    case ReportFormat::Markdown: return detail::emit_markdown(doc);
  }
  return {};
}

inline ReportDocument parse_report_json(const std::string& text) {
  ReportDocument doc;
  try {
    const auto j = nlohmann::json::parse(text);
    doc.dataset = j.at("dataset").get<std::string>();
    doc.partition_hash = j.at("partition_hash").get<std::string>();
    doc.formatting.precision = j.value("precision", 1);
    doc.formatting.gray_open = j.value("gray_open", doc.formatting.gray_open);
    doc.formatting.gray_close = j.value("gray_close", doc.formatting.gray_close);
    for (const auto& a : j.at("attributes"))
      doc.attributes.push_back({a.at("name").get<std::string>(), detail::role_from_key(a.at("role").get<std::string>())});
    for (const auto& rj : j.at("rows")) {
      ReportRow row;
      row.name = rj.at("name").get<std::string>();
      auto& r = row.report;
      r.overall.q_tr = detail::json_opt(rj, "q_tr");
      r.overall.d = detail::json_opt(rj, "d");
      r.overall.d_c = detail::json_opt(rj, "d_c");
      r.overall.bias = detail::json_opt(rj, "b");
      r.overall.low_confidence = rj.at("low_confidence").get<bool>();
      r.bias_threshold = rj.at("bias_threshold").get<double>();
      for (const Direction dir : {Direction::A2B, Direction::B2A}) {
        const auto key = std::string(to_string(dir));
        if (!rj.at("directions").contains(key)) continue;
        const auto& dj = rj["directions"][key];
        DirectionReport d;
        d.direction = dir;
        d.triplets = dj.at("triplets").get<double>();
        d.membership_violations = dj.at("membership_violations").get<double>();
        d.q_tr = detail::json_opt(dj, "q_tr");
        d.d_s = detail::json_opt(dj, "d_s");
        d.d_c = detail::json_opt(dj, "d_c");
        d.bias = detail::json_opt(dj, "b");
        for (const auto& a : dj.at("per_attribute"))
          d.per_attribute.push_back({detail::metric_from_key(a.at("metric").get<std::string>()),
                                     a.at("attribute").get<std::size_t>(), a.at("n").get<double>(),
                                     a.at("events").get<double>()});
        (dir == Direction::A2B ? r.a2b : r.b2a) = std::move(d);
      }
      doc.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad report JSON: ") + e.what());
  }
  return doc;
}

// One row per attribute, grouped as domain-splitting, content, A-specific,
// B-specific. Direction cells hold the metric that attribute enters in that
// direction: D_c for content, D_s when target-specific, Q_tr when
// source-specific or domain-splitting. B pools both directions.
inline std::string emit_per_attribute_report(const MetricReport& r, const std::vector<AttributeInfo>& attributes,
                                             ReportFormat format = ReportFormat::Markdown, int precision = 1) {
  if (precision < 1) throw ConfigError("report precision must be at least one decimal");
  const auto metric_for = [](Role role, Direction dir) {
    if (role == Role::Shared) return Metric::ContentPreservation;
    if (role == specific_role(target_of(dir))) return Metric::StyleTransfer;
    return Metric::TranslationQuality;
  };
  const auto label = [](Metric m) -> std::string {
    switch (m) {
      case Metric::TranslationQuality: return "Q_tr";
      case Metric::ContentPreservation: return "D_c";
      case Metric::StyleTransfer: return "D_s";
      case Metric::Bias: return "B";
    }
    return "?";
  };
  const auto group = [](Role role) -> std::string {
    switch (role) {
      case Role::DomainSplitting: return "Domain-splitting";
      case Role::Shared: return "Content";
      case Role::SpecificA: return "A-specific";
      case Role::SpecificB: return "B-specific";
    }
    return "?";
  };

  struct Cell {
    std::optional<double> value;
    double n = 0;
  };
  const auto lookup = [&](Direction dir, Metric m, std::size_t k) -> std::optional<Cell> {
    const auto& d = r.direction(dir);
    if (!d) return std::nullopt;
    const auto* s = d->find(m, k);
    if (!s) return std::nullopt;
    return Cell{s->percent(), s->conditioned};
  };
  const auto pooled_bias = [&](std::size_t k) -> std::optional<Cell> {
    double sum = 0, n = 0;
    int defined = 0;
    bool any = false;
    for (const Direction dir : {Direction::A2B, Direction::B2A}) {
      if (const auto c = lookup(dir, Metric::Bias, k)) {
        any = true;
        n += c->n;
        if (c->value) {
          sum += *c->value;
          ++defined;
        }
      }
    }
    if (!any) return std::nullopt;
    return Cell{defined ? std::optional<double>(sum / defined) : std::nullopt, n};
  };
  const auto fmt = [&](const std::optional<Cell>& c) -> std::pair<std::string, std::string> {
    if (!c) return {"", ""};
    return {detail::cell(c->value, precision), detail::format_double(c->n)};
  };

  std::string out;
  if (format == ReportFormat::Markdown) {
    out += "| Group | Attribute | Metric A2B / B2A | A2B | n | B2A | n | B | n |\n";
    out += "|---|---|---|---:|---:|---:|---:|---:|---:|\n";
  } else {
    out += "group,attribute,metric_a2b,a2b,n_a2b,metric_b2a,b2a,n_b2a,b,n_b\n";
  }
  for (const Role role : {Role::DomainSplitting, Role::Shared, Role::SpecificA, Role::SpecificB}) {
    for (std::size_t k = 0; k < attributes.size(); ++k) {
      if (attributes[k].role != role) continue;
      const Metric ma = metric_for(role, Direction::A2B);
      const Metric mb = metric_for(role, Direction::B2A);
      const auto [a2b, na] = fmt(lookup(Direction::A2B, ma, k));
      const auto [b2a, nb] = fmt(lookup(Direction::B2A, mb, k));
      const auto [b, nbias] = fmt(pooled_bias(k));
      if (format == ReportFormat::Markdown) {
        out += "| " + group(role) + " | " + attributes[k].name + " | " + label(ma) + " / " + label(mb) + " | " + a2b +
               " | " + na + " | " + b2a + " | " + nb + " | " + b + " | " + nbias + " |\n";
      } else {
        const auto raw_cell = [&](const std::string& s) { return s == "—" ? std::string() : s; };
        out += group(role) + "," + detail::csv_escape(attributes[k].name) + "," + label(ma) + "," + raw_cell(a2b) +
               "," + na + "," + label(mb) + "," + raw_cell(b2a) + "," + nb + "," + raw_cell(b) + "," + nbias + "\n";
      }
    }
  }
  return out;
}

inline std::string emit_pose_report(const std::vector<std::pair<std::string, PoseReport>>& rows) {
  std::string out = "| Model | Y ↓ | P ↓ | R ↓ | D_p ↓ | PM ↑ |\n|---|---:|---:|---:|---:|---:|\n";
  char buf[256];
  for (const auto& [name, p] : rows) {
    std::snprintf(buf, sizeof buf, "| %s | %.2f | %.2f | %.2f | %.2f | %.2f |\n", name.c_str(), p.mean_abs_delta[0],
                  p.mean_abs_delta[1], p.mean_abs_delta[2], p.mean_distance, p.match_fraction);
    out += buf;
  }
  return out;
}

}  // namespace ummi
