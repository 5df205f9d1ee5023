#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ummi/detail/text.hpp"
#include "ummi/error.hpp"
#include "ummi/metrics.hpp"
#include "ummi/schema.hpp"
#include "ummi/splitter.hpp"

namespace ummi {

using ordered_json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

enum class CorpusFormat { Csv, Jsonl, CelebaAttr };

inline CorpusFormat corpus_format_from_name(std::string_view s) {
  if (s == "csv") return CorpusFormat::Csv;
  if (s == "jsonl") return CorpusFormat::Jsonl;
  if (s == "celeba-attr") return CorpusFormat::CelebaAttr;
  throw ConfigError("unknown corpus format '" + std::string(s) + "'");
}

inline CorpusFormat guess_corpus_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return CorpusFormat::Csv;
  if (ext == ".jsonl" || ext == ".json") return CorpusFormat::Jsonl;
  return CorpusFormat::CelebaAttr;
}

struct Corpus {
  AttributeSchema schema;
  std::vector<LabeledExample> examples;
};

namespace detail {

// RFC 4180 fields of one CSV record (no embedded newlines).
inline std::vector<std::string> csv_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::string(trim(field)));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::string(trim(field)));
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

// Columns backing each attribute: "name" or "name.0", "name.1", ...
inline std::vector<std::string> attribute_columns(const AttributeDecl& d) {
  if (d.categorical() || d.channels == 1) return {d.name};
  std::vector<std::string> cols;
  for (std::size_t c = 0; c < d.channels; ++c) cols.push_back(d.name + "." + std::to_string(c));
  return cols;
}

inline double categorical_cell(const AttributeSchema& schema, std::size_t k, std::string_view cell) {
  if (auto c = schema.code_of(k, cell)) return *c;
  if (auto n = parse_int(cell); n && *n >= 0 && static_cast<std::size_t>(*n) < schema[k].cardinality())
    return static_cast<double>(*n);
  throw DataError("'" + std::string(cell) + "' is not a value of attribute '" + schema[k].name + "'");
}

inline double continuous_cell(const AttributeSchema& schema, std::size_t k, std::string_view cell) {
  if (auto v = parse_double(cell); v && std::isfinite(*v)) return *v;
  throw DataError("'" + std::string(cell) + "' is not a number for attribute '" + schema[k].name + "'");
}

// Infers a schema from named columns of text cells.
inline AttributeSchema infer_schema(const std::vector<std::string>& names,
                                    const std::vector<std::vector<std::string>>& columns) {
  AttributeSchema schema;
  const std::regex channel_re(R"((.+)\.(\d+))");
  std::size_t i = 0;
  while (i < names.size()) {
    const auto& cells = columns[i];
    const auto all = [&](const std::vector<std::string>& cs, auto pred) {
      return std::all_of(cs.begin(), cs.end(), pred);
    };
    const auto numeric = [](const std::string& c) { return parse_double(c).has_value(); };
    std::smatch m;
    if (std::regex_match(names[i], m, channel_re) && m[2] == "0") {
      const std::string base = m[1];
      std::size_t j = i;
      while (j < names.size() && names[j] == base + "." + std::to_string(j - i) && all(columns[j], numeric)) ++j;
      if (j - i >= 2) {
        schema.add_continuous(base, j - i);
        i = j;
        continue;
      }
    }
    if (all(cells, [](const std::string& c) { auto n = parse_int(c); return n && *n >= 0; })) {
      long long hi = 0;
      for (const auto& c : cells) hi = std::max(hi, *parse_int(c));
      schema.add_categorical(names[i], static_cast<std::size_t>(hi + 1));
    } else if (all(cells, numeric)) {
      schema.add_continuous(names[i], 1);
    } else {
      const std::set<std::string> distinct(cells.begin(), cells.end());
      schema.add_categorical(names[i], std::vector<std::string>(distinct.begin(), distinct.end()));
    }
    ++i;
  }
  return schema;
}

// Assembles examples from named text columns, using or inferring a schema.
inline Corpus corpus_from_columns(const std::vector<std::string>& ids, const std::vector<std::string>& names,
                                  const std::vector<std::vector<std::string>>& columns,
                                  const std::vector<std::size_t>& row_lines, const std::optional<AttributeSchema>& given) {
  Corpus c;
  c.schema = given ? *given : infer_schema(names, columns);
  std::map<std::string, std::size_t> col_of;
  for (std::size_t i = 0; i < names.size(); ++i) col_of[names[i]] = i;

  std::vector<std::vector<std::size_t>> sources(c.schema.size());
  for (const auto& d : c.schema.attributes()) {
    for (const auto& col : attribute_columns(d)) {
      const auto it = col_of.find(col);
      if (it == col_of.end()) throw DataError("schema mismatch: no column '" + col + "'");
      sources[d.index].push_back(it->second);
    }
  }
  for (std::size_t r = 0; r < ids.size(); ++r) {
    AttributeVector v(std::vector<double>(c.schema.slot_count()));
    try {
      for (const auto& d : c.schema.attributes()) {
        for (std::size_t ch = 0; ch < sources[d.index].size(); ++ch) {
          const auto& cell = columns[sources[d.index][ch]][r];
          v.slots()[d.offset + ch] =
              d.categorical() ? categorical_cell(c.schema, d.index, cell) : continuous_cell(c.schema, d.index, cell);
        }
      }
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(row_lines[r]) + ": " + e.what());
    }
    c.examples.push_back({ids[r], std::move(v)});
  }
  return c;
}

inline ordered_json vector_to_json(const AttributeSchema& schema, const AttributeVector& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& d : schema.attributes()) {
    const auto s = schema.value(v, d.index);
    if (d.categorical()) arr.push_back(static_cast<long long>(s[0]));
    else if (d.channels == 1) arr.push_back(s[0]);
    else arr.push_back(std::vector<double>(s.begin(), s.end()));
  }
  return arr;
}

template <typename Json>
AttributeVector vector_from_json(const AttributeSchema& schema, const Json& arr) {
  if (!arr.is_array() || arr.size() != schema.size())
    throw DataError("attribute vector must be an array of " + std::to_string(schema.size()) + " values");
  AttributeVector v(std::vector<double>(schema.slot_count()));
  for (const auto& d : schema.attributes()) {
    const auto& x = arr[d.index];
    if (d.categorical()) {
      if (x.is_string()) v.slots()[d.offset] = categorical_cell(schema, d.index, x.template get<std::string>());
      else if (x.is_number_integer()) v.slots()[d.offset] = x.template get<double>();
      else throw DataError("attribute '" + d.name + "' expects an integer code or label");
    } else {
      const bool scalar = x.is_number();
      if (scalar && d.channels == 1) {
        v.slots()[d.offset] = x.template get<double>();
      } else if (x.is_array() && x.size() == d.channels) {
        for (std::size_t c = 0; c < d.channels; ++c) {
          if (!x[c].is_number()) throw DataError("attribute '" + d.name + "' expects numbers");
          v.slots()[d.offset + c] = x[c].template get<double>();
        }
      } else {
        throw DataError("attribute '" + d.name + "' expects " + std::to_string(d.channels) + " channels");
      }
    }
  }
  if (const auto err = schema.conformance_error(v); !err.empty()) throw DataError(err);
  return v;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

}  // namespace detail

inline Corpus parse_csv_corpus(const std::string& text, const std::optional<AttributeSchema>& schema = {}) {
  const auto lines = detail::lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw DataError("CSV corpus is empty");
  const auto header = detail::csv_fields(lines[first]);
  const auto id_it = std::find(header.begin(), header.end(), "id");
  if (id_it == header.end()) throw DataError("CSV header has no 'id' column");
  const std::size_t id_col = static_cast<std::size_t>(id_it - header.begin());

  std::vector<std::string> names;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (i != id_col) names.push_back(header[i]);
  std::vector<std::vector<std::string>> columns(names.size());
  std::vector<std::string> ids;
  std::vector<std::size_t> row_lines;
  for (std::size_t l = first + 1; l < lines.size(); ++l) {
    if (detail::trim(lines[l]).empty()) continue;
    const auto fields = detail::csv_fields(lines[l]);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(l + 1) + ": expected " + std::to_string(header.size()) + " fields");
    ids.push_back(fields[id_col]);
    row_lines.push_back(l + 1);
    for (std::size_t i = 0, c = 0; i < fields.size(); ++i)
      if (i != id_col) columns[c++].push_back(fields[i]);
  }
  return detail::corpus_from_columns(ids, names, columns, row_lines, schema);
}

// CelebA `list_attr_celeba.txt`: count line, attribute-name line, then
// `<id> ±1 ...` rows; +1 maps to 1 and -1 to 0.
inline Corpus parse_celeba_attr(const std::string& text, const std::optional<AttributeSchema>& schema = {}) {
  const auto lines = detail::lines_of(text);
  if (lines.size() < 2) throw DataError("celeba attribute file needs a count line and a header line");
  const auto count = detail::parse_int(lines[0]);
  if (!count || *count < 0) throw DataError("line 1: expected the number of images");
  const auto names = detail::split_ws(lines[1]);
  if (names.empty()) throw DataError("line 2: no attribute names");

  Corpus c;
  if (schema) {
    c.schema = *schema;
  } else {
    for (const auto& n : names) c.schema.add_categorical(n, 2);
  }
  std::vector<std::optional<std::size_t>> column_attr(names.size());
  std::vector<bool> covered(c.schema.size(), false);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (auto k = c.schema.index_of(names[i])) {
      if (!c.schema[*k].categorical() || c.schema[*k].cardinality() != 2)
        throw DataError("schema mismatch: attribute '" + names[i] + "' must be binary");
      column_attr[i] = k;
      covered[*k] = true;
    }
  }
  for (std::size_t k = 0; k < covered.size(); ++k)
    if (!covered[k]) throw DataError("schema mismatch: attribute '" + c.schema[k].name + "' not in file");

  for (std::size_t l = 2; l < lines.size(); ++l) {
    const auto fields = detail::split_ws(lines[l]);
    if (fields.empty()) continue;
    const auto where = "line " + std::to_string(l + 1) + ": ";
    if (fields.size() != names.size() + 1)
      throw DataError(where + "expected " + std::to_string(names.size() + 1) + " fields");
    AttributeVector v(std::vector<double>(c.schema.slot_count()));
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto x = detail::parse_int(fields[i + 1]);
      if (!x || (*x != 1 && *x != -1)) throw DataError(where + "value '" + fields[i + 1] + "' is not ±1");
      if (column_attr[i]) c.schema.set_code(v, *column_attr[i], *x == 1 ? 1 : 0);
    }
    c.examples.push_back({fields[0], std::move(v)});
  }
  if (c.examples.size() != static_cast<std::size_t>(*count))
    throw DataError("header declares " + std::to_string(*count) + " images, file has " +
                    std::to_string(c.examples.size()));
  return c;
}

// JSONL corpus. Lines are either {"id":..., "values":[...]} (needs a schema,
// from the argument or a manifest header line) or {"id":..., "<attr>": value, ...}.
inline Corpus parse_jsonl_corpus(const std::string& text, std::optional<AttributeSchema> schema = {}) {
  const auto lines = detail::lines_of(text);
  std::vector<std::pair<std::size_t, ordered_json>> rows;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (detail::trim(lines[l]).empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(lines[l]);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("line " + std::to_string(l + 1) + ": " + e.what());
    }
    if (j.contains("manifest")) {
      if (!schema && j["manifest"].contains("schema"))
        schema = parse_schema(j["manifest"]["schema"].get<std::string>());
      continue;
    }
    rows.emplace_back(l + 1, std::move(j));
  }

  const bool array_form = !rows.empty() && rows.front().second.contains("values");
  if (array_form) {
    if (!schema) throw DataError("JSONL corpus with 'values' arrays needs a schema");
    Corpus c{*schema, {}};
    for (const auto& [line, j] : rows) {
      try {
        c.examples.push_back({j.at("id").get<std::string>(), detail::vector_from_json(c.schema, j.at("values"))});
      } catch (const std::exception& e) {
        throw DataError("line " + std::to_string(line) + ": " + e.what());
      }
    }
    return c;
  }

  std::vector<std::string> names;
  if (!rows.empty())
    for (const auto& [key, _] : rows.front().second.items())
      if (key != "id") names.push_back(key);
  std::vector<std::vector<std::string>> columns(names.size());
  std::vector<std::string> ids;
  std::vector<std::size_t> row_lines;
  for (const auto& [line, j] : rows) {
    if (!j.contains("id")) throw DataError("line " + std::to_string(line) + ": missing 'id'");
    ids.push_back(j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump());
    row_lines.push_back(line);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!j.contains(names[i])) throw DataError("line " + std::to_string(line) + ": missing '" + names[i] + "'");
      const auto& x = j[names[i]];
      columns[i].push_back(x.is_string() ? x.get<std::string>() : x.dump());
    }
  }
  if (schema) {
    // Flatten multi-channel arrays into name.N columns.
    std::vector<std::string> flat_names;
    std::vector<std::vector<std::string>> flat_cols;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto k = schema->index_of(names[i]);
      if (k && !(*schema)[*k].categorical() && (*schema)[*k].channels > 1) {
        const auto ch = (*schema)[*k].channels;
        for (std::size_t c = 0; c < ch; ++c) {
          flat_names.push_back(names[i] + "." + std::to_string(c));
          flat_cols.emplace_back();
          for (const auto& cell : columns[i]) {
            const auto arr = nlohmann::json::parse(cell);
            if (!arr.is_array() || arr.size() != ch) throw DataError("attribute '" + names[i] + "' expects channels");
            flat_cols.back().push_back(arr[c].dump());
          }
        }
      } else {
        flat_names.push_back(names[i]);
        flat_cols.push_back(columns[i]);
      }
    }
    return detail::corpus_from_columns(ids, flat_names, flat_cols, row_lines, schema);
  }
  return detail::corpus_from_columns(ids, names, columns, row_lines, schema);
}

inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                          const std::optional<AttributeSchema>& schema = {}) {
  const auto text = read_file(path);
  switch (format) {
    case CorpusFormat::Csv: return parse_csv_corpus(text, schema);
    case CorpusFormat::Jsonl: return parse_jsonl_corpus(text, schema);
    case CorpusFormat::CelebaAttr: return parse_celeba_attr(text, schema);
  }
  throw ConfigError("unknown corpus format");
}

// ---------------------------------------------------------------------------
// Manifests: a header line, then one {"id", "values"} object per example.

inline std::string serialize_manifest(const DomainManifest& m, const AttributeSchema& schema) {
  ordered_json header;
  header["manifest"] = {{"domain", std::string(to_string(m.domain))},
                        {"partition_hash", m.partition_hash},
                        {"source", m.provenance.source},
                        {"filtered_at", m.provenance.filtered_at},
                        {"count", m.size()},
                        {"schema", serialize_schema(schema)}};
  std::string out = header.dump() + "\n";
  for (const auto& ex : m.examples) {
    ordered_json row;
    row["id"] = ex.id;
    row["values"] = detail::vector_to_json(schema, ex.values);
    out += row.dump() + "\n";
  }
  return out;
}

struct LoadedManifest {
  AttributeSchema schema;
  DomainManifest manifest;
};

inline LoadedManifest parse_manifest(const std::string& text) {
  const auto lines = detail::lines_of(text);
  if (lines.empty()) throw DataError("manifest is empty");
  LoadedManifest out;
  try {
    const auto header = nlohmann::json::parse(lines[0]).at("manifest");
    const auto domain = header.at("domain").get<std::string>();
    if (domain != "A" && domain != "B") throw DataError("manifest domain must be A or B");
    out.manifest.domain = domain == "A" ? Domain::A : Domain::B;
    out.manifest.partition_hash = header.at("partition_hash").get<std::string>();
    out.manifest.provenance.source = header.value("source", "");
    out.manifest.provenance.filtered_at = header.value("filtered_at", "");
    out.schema = parse_schema(header.at("schema").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("line 1: bad manifest header: ") + e.what());
  }
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (detail::trim(lines[l]).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(lines[l]);
      out.manifest.examples.push_back(
          {j.at("id").get<std::string>(), detail::vector_from_json(out.schema, j.at("values"))});
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(l + 1) + ": " + e.what());
    }
  }
  return out;
}

inline std::string serialize_id_list(const DomainManifest& m) {
  std::string out;
  for (const auto& ex : m.examples) out += ex.id + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Triplets.

struct TripletFileHeader {
  std::string partition_hash;
  std::string oracle;
  std::optional<std::uint64_t> seed;
};

inline std::string serialize_triplets_jsonl(std::span<const TranslationTriplet> triplets,
                                            const AttributeSchema& schema, const TripletFileHeader& header = {}) {
  std::string out;
  if (!header.partition_hash.empty() || !header.oracle.empty() || header.seed) {
    ordered_json h;
    h["triplets"] = ordered_json::object();
    if (!header.partition_hash.empty()) h["triplets"]["partition_hash"] = header.partition_hash;
    if (!header.oracle.empty()) h["triplets"]["oracle"] = header.oracle;
    if (header.seed) h["triplets"]["seed"] = *header.seed;
    out += h.dump() + "\n";
  }
  for (const auto& t : triplets) {
    ordered_json row;
    row["direction"] = std::string(to_string(t.direction));
    row["y_a"] = detail::vector_to_json(schema, t.y_a);
    row["y_b"] = detail::vector_to_json(schema, t.y_b);
    row["y_hat"] = detail::vector_to_json(schema, t.y_hat);
    if (t.y_a_gt) row["y_a_gt"] = detail::vector_to_json(schema, *t.y_a_gt);
    if (t.y_b_gt) row["y_b_gt"] = detail::vector_to_json(schema, *t.y_b_gt);
    if (!t.input_id.empty()) row["input_id"] = t.input_id;
    if (!t.guidance_id.empty()) row["guidance_id"] = t.guidance_id;
    out += row.dump() + "\n";
  }
  return out;
}

inline Direction parse_direction(std::string_view s) {
  if (s == "A2B") return Direction::A2B;
  if (s == "B2A") return Direction::B2A;
  throw DataError("direction must be A2B or B2A, got '" + std::string(s) + "'");
}

struct LoadedTriplets {
  TripletFileHeader header;
  std::vector<TranslationTriplet> triplets;
};

inline LoadedTriplets parse_triplets_jsonl(const std::string& text, const AttributeSchema& schema) {
  LoadedTriplets out;
  const auto lines = detail::lines_of(text);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (detail::trim(lines[l]).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(lines[l]);
      if (j.contains("triplets")) {
        const auto& h = j["triplets"];
        out.header.partition_hash = h.value("partition_hash", "");
        out.header.oracle = h.value("oracle", "");
        if (h.contains("seed")) out.header.seed = h["seed"].get<std::uint64_t>();
        continue;
      }
      TranslationTriplet t;
      t.direction = parse_direction(j.at("direction").get<std::string>());
      t.y_a = detail::vector_from_json(schema, j.at("y_a"));
      t.y_b = detail::vector_from_json(schema, j.at("y_b"));
      t.y_hat = detail::vector_from_json(schema, j.at("y_hat"));
      if (j.contains("y_a_gt")) t.y_a_gt = detail::vector_from_json(schema, j["y_a_gt"]);
      if (j.contains("y_b_gt")) t.y_b_gt = detail::vector_from_json(schema, j["y_b_gt"]);
      t.input_id = j.value("input_id", "");
      t.guidance_id = j.value("guidance_id", "");
      out.triplets.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(l + 1) + ": " + e.what());
    }
  }
  return out;
}

namespace detail {
inline std::vector<std::string> vector_cells(const AttributeSchema& schema, const AttributeVector& v) {
  std::vector<std::string> cells;
  for (const auto& d : schema.attributes()) {
    const auto s = schema.value(v, d.index);
    if (d.categorical()) cells.push_back(schema.label_of(d.index, static_cast<CategoryCode>(s[0])));
    else
      for (double x : s) cells.push_back(format_double(x));
  }
  return cells;
}
}  // namespace detail

// CSV triplets: direction, input_id, guidance_id, then a_/b_/hat_ columns and
// optional a_gt_/b_gt_ columns for every attribute column.
inline std::string serialize_triplets_csv(std::span<const TranslationTriplet> triplets, const AttributeSchema& schema) {
  const bool with_gt = std::any_of(triplets.begin(), triplets.end(), [](const auto& t) { return t.y_a_gt && t.y_b_gt; });
  std::vector<std::string> cols;
  for (const auto& d : schema.attributes())
    for (const auto& c : detail::attribute_columns(d)) cols.push_back(c);
  std::vector<std::string> header = {"direction", "input_id", "guidance_id"};
  std::vector<std::string> prefixes = {"a_", "b_", "hat_"};
  if (with_gt) prefixes.insert(prefixes.end(), {"a_gt_", "b_gt_"});
  for (const auto& p : prefixes)
    for (const auto& c : cols) header.push_back(p + c);
  std::string out = detail::join(header, ",") + "\n";
  for (const auto& t : triplets) {
    std::vector<std::string> row = {std::string(to_string(t.direction)), detail::csv_escape(t.input_id),
                                    detail::csv_escape(t.guidance_id)};
    std::vector<const AttributeVector*> vecs = {&t.y_a, &t.y_b, &t.y_hat};
    if (with_gt) {
      if (!t.y_a_gt || !t.y_b_gt) throw DataError("CSV needs ground truth on every triplet or none");
      vecs.push_back(&*t.y_a_gt);
      vecs.push_back(&*t.y_b_gt);
    }
    for (const auto* v : vecs)
      for (auto& cell : detail::vector_cells(schema, *v)) row.push_back(detail::csv_escape(cell));
    out += detail::join(row, ",") + "\n";
  }
  return out;
}

inline std::vector<TranslationTriplet> parse_triplets_csv(const std::string& text, const AttributeSchema& schema) {
  const auto lines = detail::lines_of(text);
  if (lines.empty()) throw DataError("triplet CSV is empty");
  const auto header = detail::csv_fields(lines[0]);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.count("direction")) throw DataError("triplet CSV has no 'direction' column");

  const auto read_vector = [&](const std::vector<std::string>& f, const std::string& prefix,
                               bool optional) -> std::optional<AttributeVector> {
    AttributeVector v(std::vector<double>(schema.slot_count()));
    for (const auto& d : schema.attributes()) {
      const auto names = detail::attribute_columns(d);
      for (std::size_t c = 0; c < names.size(); ++c) {
        const auto it = col.find(prefix + names[c]);
        if (it == col.end()) {
          if (optional) return std::nullopt;
          throw DataError("schema mismatch: no column '" + prefix + names[c] + "'");
        }
        const auto& cell = f[it->second];
        v.slots()[d.offset + c] = d.categorical() ? detail::categorical_cell(schema, d.index, cell)
                                                  : detail::continuous_cell(schema, d.index, cell);
      }
    }
    return v;
  };

  std::vector<TranslationTriplet> out;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (detail::trim(lines[l]).empty()) continue;
    try {
      const auto f = detail::csv_fields(lines[l]);
      if (f.size() != header.size()) throw DataError("expected " + std::to_string(header.size()) + " fields");
      TranslationTriplet t;
      t.direction = parse_direction(f[col["direction"]]);
      if (col.count("input_id")) t.input_id = f[col["input_id"]];
      if (col.count("guidance_id")) t.guidance_id = f[col["guidance_id"]];
      t.y_a = *read_vector(f, "a_", false);
      t.y_b = *read_vector(f, "b_", false);
      t.y_hat = *read_vector(f, "hat_", false);
      t.y_a_gt = read_vector(f, "a_gt_", true);
      t.y_b_gt = read_vector(f, "b_gt_", true);
      out.push_back(std::move(t));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(l + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ummi
