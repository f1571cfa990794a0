#pragma once

// Evaluation runs: the run configuration document, JSON serialization of
// every result type, markdown table rendering, and run_report() which ties
// ingestion, normalization, comparison and aggregation together.
//
// Output is deterministic: objects keep insertion order, rows are sorted by
// example id, and nothing time- or host-dependent is written.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agreement.hpp"
#include "codeset.hpp"
#include "hierarchy.hpp"
#include "rf2.hpp"

namespace codedist {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr ConceptId kClinicalFinding{404684003};

struct CoderPair {
  std::string left;
  std::string right;

  std::string name() const { return left + " vs " + right; }
  friend bool operator==(const CoderPair&, const CoderPair&) = default;
};

struct MicroAverageGroup {
  std::string name;
  std::vector<CoderPair> comparisons;
};

struct AcceptabilityGroup {
  std::string name;
  std::vector<std::string> coders;
};

struct RunConfig {
  IngestConfig ingest;
  ConceptId focus_root = kClinicalFinding;
  bool focus_inclusive = true;
  DenominatorPolicy policy = DenominatorPolicy::TermCount;
  Thresholds thresholds;
  std::string annotations_path;
  std::vector<CoderPair> comparisons;
  std::vector<MicroAverageGroup> micro_average_groups;
  /// Coder the matrices and the distance-vs-rating table are measured
  /// against, usually the gold standard.
  std::optional<std::string> reference_coder;
  /// Pairs of coders for band matrices (each side compared to the reference).
  std::vector<CoderPair> band_matrices;
  /// Pairs of coders for rating cross-tabulations.
  std::vector<CoderPair> rating_matrices;
  /// Coders whose panel ratings feed the acceptability summary and the
  /// distance-vs-rating table.
  std::vector<std::string> rated_coders;
  std::vector<AcceptabilityGroup> acceptability_groups;
  std::string output_path;
  std::optional<std::string> markdown_path;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

[[noreturn]] inline void config_error(const std::string& msg) {
  throw Error(ErrorKind::ConfigError, "config: " + msg);
}

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal().string();
}

inline std::string get_string(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) config_error("missing '" + std::string(key) + "' in " + where);
  if (!obj[key].is_string())
    config_error("'" + std::string(key) + "' in " + where + " must be a string");
  return obj[key].get<std::string>();
}

inline CoderPair parse_pair(const Json& j, const std::string& where) {
  if (j.is_array() && j.size() == 2 && j[0].is_string() && j[1].is_string())
    return {j[0].get<std::string>(), j[1].get<std::string>()};
  if (j.is_object()) {
    reject_unknown_keys(j, {"left", "right"}, where);
    return {get_string(j, "left", where), get_string(j, "right", where)};
  }
  config_error(where + " must be [left, right] or {\"left\", \"right\"}");
}

inline std::vector<CoderPair> parse_pairs(const Json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be a list");
  std::vector<CoderPair> out;
  for (const auto& e : j) out.push_back(parse_pair(e, where));
  return out;
}

inline std::vector<std::string> parse_strings(const Json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) config_error(where + " must be a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline Thresholds parse_thresholds(const Json& j) {
  if (!j.is_array()) config_error("metric.thresholds must be a list");
  std::vector<Rational> bounds;
  for (const auto& e : j) {
    std::optional<Rational> r;
    if (e.is_number_integer())
      r = Rational(e.get<std::int64_t>());
    else if (e.is_string())
      r = parse_rational(e.get<std::string>());
    if (!r) config_error("threshold " + e.dump() + " is not an integer or rational string");
    bounds.push_back(*r);
  }
  try {
    return Thresholds(std::move(bounds));
  } catch (const Error& e) {
    config_error(e.what());
  }
}

inline IngestConfig parse_terminology(const Json& t, const std::filesystem::path& base) {
  if (!t.is_object()) config_error("'terminology' must be an object");
  const std::string source = get_string(t, "source", "terminology");
  IngestConfig c;
  if (source == "edge_list") {
    reject_unknown_keys(t, {"source", "edges", "lenient"}, "terminology");
    c = IngestConfig::edge_list(resolve(base, get_string(t, "edges", "terminology")));
  } else if (source == "rf2") {
    reject_unknown_keys(t,
                        {"source", "concepts", "relationships", "selector",
                         "include_inactive", "lenient"},
                        "terminology");
    c = IngestConfig::rf2(resolve(base, get_string(t, "concepts", "terminology")),
                          resolve(base, get_string(t, "relationships", "terminology")));
    if (t.contains("selector")) {
      auto s = parse_selector(get_string(t, "selector", "terminology"));
      if (!s) config_error("terminology.selector must be inferred, stated or any");
      c.selector = *s;
    }
    if (t.contains("include_inactive")) {
      if (!t["include_inactive"].is_boolean())
        config_error("terminology.include_inactive must be a boolean");
      c.include_inactive = t["include_inactive"].get<bool>();
    }
  } else {
    config_error("terminology.source must be 'edge_list' or 'rf2'");
  }
  if (t.contains("lenient")) {
    if (!t["lenient"].is_boolean()) config_error("terminology.lenient must be a boolean");
    c.mode = t["lenient"].get<bool>() ? ParseMode::Lenient : ParseMode::Strict;
  }
  return c;
}

}  // namespace detail

/// Parses a run configuration document. Relative paths resolve against
/// base_dir (normally the directory holding the config file). Throws Error
/// with kind ConfigError.
inline RunConfig parse_run_config(const std::string& text,
                                  const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("top level must be an object");
  reject_unknown_keys(j,
                      {"terminology", "focus", "metric", "annotations", "comparisons",
                       "micro_average_groups", "reference_coder", "band_matrices",
                       "rating_matrices", "rated_coders", "acceptability_groups",
                       "output"},
                      "config");

  RunConfig c;
  if (!j.contains("terminology")) config_error("missing 'terminology'");
  c.ingest = parse_terminology(j["terminology"], base_dir);

  if (j.contains("focus")) {
    const Json& f = j["focus"];
    if (!f.is_object()) config_error("'focus' must be an object");
    reject_unknown_keys(f, {"root", "inclusive"}, "focus");
    if (f.contains("root")) {
      if (!f["root"].is_number_unsigned() || f["root"].get<std::uint64_t>() == 0)
        config_error("focus.root must be a positive integer");
      c.focus_root = ConceptId{f["root"].get<std::uint64_t>()};
    }
    if (f.contains("inclusive")) {
      if (!f["inclusive"].is_boolean()) config_error("focus.inclusive must be a boolean");
      c.focus_inclusive = f["inclusive"].get<bool>();
    }
  }

  if (j.contains("metric")) {
    const Json& m = j["metric"];
    if (!m.is_object()) config_error("'metric' must be an object");
    reject_unknown_keys(m, {"policy", "thresholds"}, "metric");
    if (m.contains("policy")) {
      auto p = parse_policy(get_string(m, "policy", "metric"));
      if (!p) config_error("metric.policy must be term_count or set_union");
      c.policy = *p;
    }
    if (m.contains("thresholds")) c.thresholds = parse_thresholds(m["thresholds"]);
  }

  c.annotations_path = resolve(base_dir, get_string(j, "annotations", "config"));

  if (!j.contains("comparisons")) config_error("missing 'comparisons'");
  c.comparisons = parse_pairs(j["comparisons"], "comparisons");

  if (j.contains("micro_average_groups")) {
    const Json& g = j["micro_average_groups"];
    if (!g.is_array()) config_error("micro_average_groups must be a list");
    for (const auto& e : g) {
      if (!e.is_object()) config_error("micro_average_groups entries must be objects");
      reject_unknown_keys(e, {"name", "comparisons"}, "micro_average_groups");
      if (!e.contains("comparisons"))
        config_error("micro_average_groups entry without 'comparisons'");
      c.micro_average_groups.push_back(
          {get_string(e, "name", "micro_average_groups"),
           parse_pairs(e["comparisons"], "micro_average_groups.comparisons")});
    }
  }

  if (j.contains("reference_coder"))
    c.reference_coder = get_string(j, "reference_coder", "config");
  if (j.contains("band_matrices"))
    c.band_matrices = parse_pairs(j["band_matrices"], "band_matrices");
  if (j.contains("rating_matrices"))
    c.rating_matrices = parse_pairs(j["rating_matrices"], "rating_matrices");
  if (j.contains("rated_coders"))
    c.rated_coders = parse_strings(j["rated_coders"], "rated_coders");
  if (j.contains("acceptability_groups")) {
    const Json& g = j["acceptability_groups"];
    if (!g.is_array()) config_error("acceptability_groups must be a list");
    for (const auto& e : g) {
      if (!e.is_object()) config_error("acceptability_groups entries must be objects");
      reject_unknown_keys(e, {"name", "coders"}, "acceptability_groups");
      if (!e.contains("coders")) config_error("acceptability_groups entry without 'coders'");
      c.acceptability_groups.push_back(
          {get_string(e, "name", "acceptability_groups"),
           parse_strings(e["coders"], "acceptability_groups.coders")});
    }
  }

  if (j.contains("output")) {
    const Json& o = j["output"];
    if (!o.is_object()) config_error("'output' must be an object");
    reject_unknown_keys(o, {"json", "markdown"}, "output");
    if (o.contains("json")) c.output_path = resolve(base_dir, get_string(o, "json", "output"));
    if (o.contains("markdown"))
      c.markdown_path = resolve(base_dir, get_string(o, "markdown", "output"));
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::filesystem::path(path).parent_path());
}

/// Structural checks that need no input files.
inline void validate_run_config(const RunConfig& c) {
  using detail::config_error;
  if (c.comparisons.empty()) config_error("'comparisons' must not be empty");
  if ((!c.band_matrices.empty() || !c.rated_coders.empty()) && !c.reference_coder)
    config_error("band_matrices and rated_coders require 'reference_coder'");
  if (c.output_path.empty()) config_error("no JSON output path (output.json)");
}

// ---------------------------------------------------------------------------
// JSON serialization

inline Json to_json(const IngestConfig& c) {
  Json j;
  if (c.source_kind == SourceKind::EdgeList) {
    j["source"] = "edge_list";
    j["edges"] = c.relationship_path;
  } else {
    j["source"] = "rf2";
    j["concepts"] = c.concept_path;
    j["relationships"] = c.relationship_path;
    j["selector"] = std::string(to_string(c.selector));
    j["include_inactive"] = c.include_inactive;
  }
  j["lenient"] = c.mode == ParseMode::Lenient;
  return j;
}

inline Json to_json(const IngestReport& r) {
  Json j;
  j["concepts_read"] = r.concepts_read;
  j["inactive_excluded"] = r.inactive_excluded;
  j["edges_read"] = r.edges_read;
  j["edges_dropped"] = r.edges_dropped;
  j["malformed_lines"] = r.malformed_lines;
  j["warnings"] = r.warnings;
  return j;
}

inline Json to_json(const Thresholds& t) {
  Json j = Json::array();
  for (const auto& b : t.bounds()) j.push_back(to_string(b));
  return j;
}

inline Json to_json(const DistanceResult& d, const Thresholds& t) {
  Json j;
  j["numerator"] = d.numerator;
  j["denominator"] = d.denominator;
  j["value"] = to_string(d.value);
  j["policy"] = std::string(to_string(d.policy));
  j["exact_match"] = d.exact_match;
  j["band"] = band_label(distance_band(d, t), t);
  return j;
}

inline Json to_json(const NormalizationReport& r) {
  auto ids = [](const std::vector<ConceptId>& v) {
    Json a = Json::array();
    for (ConceptId c : v) a.push_back(c.value);
    return a;
  };
  Json j;
  j["kept"] = r.kept;
  j["dropped_unknown"] = ids(r.dropped_unknown);
  j["dropped_out_of_focus"] = ids(r.dropped_out_of_focus);
  j["dropped_duplicates"] = r.dropped_duplicates;
  j["empty_after_normalization"] = r.empty_after_normalization;
  return j;
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["terminology"] = to_json(c.ingest);
  j["focus_root"] = c.focus_root.value;
  j["focus_inclusive"] = c.focus_inclusive;
  j["policy"] = std::string(to_string(c.policy));
  j["denominator_note"] = std::string(kDenominatorNote);
  j["thresholds"] = to_json(c.thresholds);
  j["annotations"] = c.annotations_path;
  auto pairs = [](const std::vector<CoderPair>& ps) {
    Json a = Json::array();
    for (const auto& p : ps) a.push_back(Json::array({p.left, p.right}));
    return a;
  };
  j["comparisons"] = pairs(c.comparisons);
  j["micro_average_groups"] = Json::array();
  for (const auto& g : c.micro_average_groups)
    j["micro_average_groups"].push_back({{"name", g.name}, {"comparisons", pairs(g.comparisons)}});
  j["reference_coder"] = c.reference_coder ? Json(*c.reference_coder) : Json(nullptr);
  j["band_matrices"] = pairs(c.band_matrices);
  j["rating_matrices"] = pairs(c.rating_matrices);
  j["rated_coders"] = c.rated_coders;
  j["acceptability_groups"] = Json::array();
  for (const auto& g : c.acceptability_groups)
    j["acceptability_groups"].push_back({{"name", g.name}, {"coders", g.coders}});
  j["output"] = {{"json", c.output_path},
                 {"markdown", c.markdown_path ? Json(*c.markdown_path) : Json(nullptr)}};
  return j;
}

namespace detail {

inline std::vector<std::string> cumulative_labels(const Thresholds& t) {
  std::vector<std::string> out{"exact"};
  for (const auto& b : t.bounds()) out.push_back("<=" + to_string(b));
  return out;
}

inline Json percent_json(std::size_t count, std::size_t n) {
  if (n == 0) return nullptr;
  return rounded_percent(count, n);
}

}  // namespace detail

inline Json to_json(const BandRow& row, const Thresholds& t) {
  const auto labels = detail::cumulative_labels(t);
  Json j;
  j["n"] = row.n;
  Json cols = Json::array();
  for (std::size_t i = 0; i < row.cumulative.size(); ++i) {
    const auto c = row.cumulative[i];
    cols.push_back({{"label", labels[i]},
                    {"count", c},
                    {"fraction", row.n ? Json(to_string(Rational(static_cast<std::int64_t>(c),
                                                                 static_cast<std::int64_t>(row.n))))
                                       : Json(nullptr)},
                    {"percent", detail::percent_json(c, row.n)}});
  }
  j["cumulative"] = std::move(cols);
  return j;
}

inline Json to_json(const BandTable& t) {
  Json j;
  j["thresholds"] = to_json(t.thresholds);
  j["all"] = to_json(t.all, t.thresholds);
  j["single_finding"] = to_json(t.single, t.thresholds);
  j["multi_finding"] = to_json(t.multi, t.thresholds);
  return j;
}

inline Json to_json(const ComparisonRow& r, const Thresholds& t) {
  Json j;
  j["example_id"] = r.example_id;
  j["left"] = to_string(r.left_set);
  j["right"] = to_string(r.right_set);
  j["distance"] = to_json(r.distance, t);
  j["stratum"] = std::string(to_string(r.stratum));
  j["left_normalization"] = to_json(r.left_report);
  j["right_normalization"] = to_json(r.right_report);
  return j;
}

inline Json to_json(const ExclusionRecord& e) {
  Json j;
  j["example_id"] = e.example_id;
  j["reason"] = std::string(to_string(e.reason));
  if (!e.missing_coder.empty()) j["missing_coder"] = e.missing_coder;
  if (e.left_report) j["left_normalization"] = to_json(*e.left_report);
  if (e.right_report) j["right_normalization"] = to_json(*e.right_report);
  return j;
}

inline Json to_json(const CountMatrix& m) {
  Json j;
  j["labels"] = m.labels;
  j["cells"] = m.cells;
  j["total"] = m.total();
  return j;
}

inline Json to_json(const AcceptabilityRow& r) {
  Json j;
  j["name"] = r.name;
  j["n"] = r.n;
  j["counts"] = {{"good", r.good},
                 {"acceptable", r.acceptable},
                 {"good_or_acceptable", r.good_or_acceptable()},
                 {"not_acceptable", r.not_acceptable}};
  j["percent"] = {{"good", detail::percent_json(r.good, r.n)},
                  {"acceptable", detail::percent_json(r.acceptable, r.n)},
                  {"good_or_acceptable", detail::percent_json(r.good_or_acceptable(), r.n)},
                  {"not_acceptable", detail::percent_json(r.not_acceptable, r.n)}};
  return j;
}

// ---------------------------------------------------------------------------
// Markdown rendering

namespace detail {

inline std::string md_row(const std::vector<std::string>& cells) {
  std::string s = "|";
  for (const auto& c : cells) s += " " + c + " |";
  return s + "\n";
}

inline std::string md_rule(std::size_t n) {
  std::string s = "|";
  for (std::size_t i = 0; i < n; ++i) s += "---|";
  return s + "\n";
}

inline std::vector<std::string> band_cells(const BandRow& row) {
  std::vector<std::string> out{std::to_string(row.n)};
  for (auto c : row.cumulative) out.push_back(render_percent(c, row.n));
  return out;
}

inline std::string band_header(const Thresholds& t, std::vector<std::string> lead) {
  lead.push_back("n");
  lead.push_back("Exact match (%)");
  for (const auto& b : t.bounds()) lead.push_back("<=" + to_string(b));
  return md_row(lead) + md_rule(lead.size());
}

}  // namespace detail

inline std::string render_markdown(const BandTable& t, const std::string& title) {
  std::string s = "### " + title + "\n\n" + detail::band_header(t.thresholds, {""});
  const std::pair<const char*, const BandRow*> rows[] = {
      {"All", &t.all}, {"Single-finding", &t.single}, {"Multi-finding", &t.multi}};
  for (const auto& [name, row] : rows) {
    auto cells = detail::band_cells(*row);
    cells.insert(cells.begin(), name);
    s += detail::md_row(cells);
  }
  return s + "\n";
}

/// One block per stratum listing each member comparison and the pooled row.
inline std::string render_markdown(const std::vector<std::pair<std::string, BandTable>>& members,
                                   const BandTable& pooled, const std::string& name) {
  std::string s = "### " + name + "\n\n" + detail::band_header(pooled.thresholds, {"", ""});
  const std::pair<const char*, const BandRow BandTable::*> strata[] = {
      {"All", &BandTable::all},
      {"Single-finding", &BandTable::single},
      {"Multi-finding", &BandTable::multi}};
  for (const auto& [label, field] : strata) {
    bool first = true;
    auto emit = [&](const std::string& who, const BandRow& row) {
      auto cells = detail::band_cells(row);
      cells.insert(cells.begin(), who);
      cells.insert(cells.begin(), first ? label : "");
      first = false;
      s += detail::md_row(cells);
    };
    for (const auto& [who, table] : members) emit(who, table.*field);
    emit(name, pooled.*field);
  }
  return s + "\n";
}

inline std::string render_markdown(const CountMatrix& m, const std::string& title,
                                   const std::string& row_coder, const std::string& col_coder) {
  std::string s = "### " + title + "\n\n";
  std::vector<std::string> head{row_coder + " \\ " + col_coder};
  head.insert(head.end(), m.labels.begin(), m.labels.end());
  s += detail::md_row(head) + detail::md_rule(head.size());
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    std::vector<std::string> row{m.labels[i]};
    for (auto c : m.cells[i]) row.push_back(std::to_string(c));
    s += detail::md_row(row);
  }
  return s + "\n";
}

inline std::string render_markdown(const std::vector<AcceptabilityRow>& rows,
                                   const std::string& title) {
  std::string s = "### " + title + "\n\n";
  const std::vector<std::string> head{"", "n", "Good %", "Acceptable %",
                                      "Cumulative (Good / Acceptable) %", "Not acceptable %"};
  s += detail::md_row(head) + detail::md_rule(head.size());
  for (const auto& r : rows)
    s += detail::md_row({r.name, std::to_string(r.n), render_percent(r.good, r.n),
                         render_percent(r.acceptable, r.n),
                         render_percent(r.good_or_acceptable(), r.n),
                         render_percent(r.not_acceptable, r.n)});
  return s + "\n";
}

inline std::string render_markdown(const RatingBandTable& t, const std::string& title) {
  std::string s = "### " + title + "\n\n" + detail::band_header(t.thresholds, {""});
  for (std::size_t i = 0; i < kRatings.size(); ++i) {
    auto cells = detail::band_cells(t.rows[i]);
    cells.insert(cells.begin(), std::string(display_name(kRatings[i])));
    s += detail::md_row(cells);
  }
  return s + "\n";
}

// ---------------------------------------------------------------------------
// Running a report

struct Report {
  Json document;
  std::string markdown;

  std::string json_text() const { return document.dump(2) + "\n"; }
};

namespace detail {

inline void require_coder(const AnnotationSet& a, const std::string& coder) {
  if (!a.has_coder(coder))
    throw Error(ErrorKind::UnknownCoder,
                "coder '" + coder + "' does not occur in the annotations");
}

}  // namespace detail

/// Runs every configured comparison and aggregation over an already loaded
/// terminology and annotation set.
inline Report build_report(const RunConfig& config, const Ingested& terminology,
                           const AnnotationSet& annotations) {
  validate_run_config(config);
  for (const auto& p : config.comparisons) {
    detail::require_coder(annotations, p.left);
    detail::require_coder(annotations, p.right);
  }
  for (const auto& g : config.micro_average_groups)
    for (const auto& p : g.comparisons) {
      detail::require_coder(annotations, p.left);
      detail::require_coder(annotations, p.right);
    }
  if (config.reference_coder) detail::require_coder(annotations, *config.reference_coder);
  for (const auto* list : {&config.band_matrices, &config.rating_matrices})
    for (const auto& p : *list) {
      detail::require_coder(annotations, p.left);
      detail::require_coder(annotations, p.right);
    }
  for (const auto& c : config.rated_coders) detail::require_coder(annotations, c);
  for (const auto& g : config.acceptability_groups)
    for (const auto& c : g.coders) detail::require_coder(annotations, c);

  const FocusView view =
      focus_subgraph(terminology.graph, config.focus_root, config.focus_inclusive);
  DistanceCache cache(view);
  const Thresholds& t = config.thresholds;

  std::map<std::pair<std::string, std::string>, PairComparison> done;
  auto compare = [&](const std::string& l, const std::string& r) -> const PairComparison& {
    auto key = std::make_pair(l, r);
    auto it = done.find(key);
    if (it == done.end())
      it = done.emplace(key, pair_comparison(annotations, l, r, cache, config.policy, t)).first;
    return it->second;
  };

  Report rep;
  Json& doc = rep.document;
  std::string& md = rep.markdown;
  doc["schema_version"] = kSchemaVersion;
  doc["configuration"] = to_json(config);
  doc["terminology"] = {{"concepts", terminology.graph.concept_count()},
                        {"edges", terminology.graph.edge_count()},
                        {"focus_members", view.size()},
                        {"ingest_report", to_json(terminology.report)}};

  md += "# Coding agreement report\n\n";
  md += "Denominator policy: `" + std::string(to_string(config.policy)) + "`. " +
        std::string(kDenominatorNote) + "\n\n";
  md += "Focus root: " + to_string(config.focus_root) +
        (config.focus_inclusive ? " (inclusive)" : " (strict descendants)") + "\n\n";

  // Example counts per comparison.
  std::string counts = "### Examples compared\n\n";
  const std::vector<std::string> count_head{"Pairwise comparison", "Total examples compared",
                                            "Single-finding", "Multi-finding", "Excluded"};
  counts += detail::md_row(count_head) + detail::md_rule(count_head.size());

  Json comps = Json::array();
  std::string tables;
  for (const auto& p : config.comparisons) {
    const PairComparison& pc = compare(p.left, p.right);
    const BandTable bt = band_table(pc.rows, t);
    Json c;
    c["name"] = p.name();
    c["left"] = p.left;
    c["right"] = p.right;
    c["examples_compared"] = pc.rows.size();
    c["single_finding"] = bt.single.n;
    c["multi_finding"] = bt.multi.n;
    c["excluded"] = pc.exclusions.size();
    c["band_table"] = to_json(bt);
    c["rows"] = Json::array();
    for (const auto& r : pc.rows) c["rows"].push_back(to_json(r, t));
    c["exclusions"] = Json::array();
    for (const auto& e : pc.exclusions) c["exclusions"].push_back(to_json(e));
    comps.push_back(std::move(c));
    counts += detail::md_row({p.name(), std::to_string(pc.rows.size()),
                              std::to_string(bt.single.n), std::to_string(bt.multi.n),
                              std::to_string(pc.exclusions.size())});
    tables += render_markdown(bt, p.name() + " (distance bands)");
  }
  doc["comparisons"] = std::move(comps);
  md += counts + "\n" + tables;

  Json micro = Json::array();
  for (const auto& g : config.micro_average_groups) {
    std::vector<std::vector<ComparisonRow>> lists;
    std::vector<std::pair<std::string, BandTable>> members;
    Json names = Json::array();
    for (const auto& p : g.comparisons) {
      const PairComparison& pc = compare(p.left, p.right);
      lists.push_back(pc.rows);
      members.emplace_back(p.name(), band_table(pc.rows, t));
      names.push_back(p.name());
    }
    const BandTable pooled = micro_average(lists, t);
    micro.push_back({{"name", g.name}, {"comparisons", names}, {"band_table", to_json(pooled)}});
    md += render_markdown(members, pooled, g.name);
  }
  doc["micro_averages"] = std::move(micro);

  Json bmats = Json::array();
  for (const auto& p : config.band_matrices) {
    const auto& ref = *config.reference_coder;
    const PairComparison& l = compare(p.left, ref);
    const PairComparison& r = compare(p.right, ref);
    const CountMatrix m = cross_band_matrix(l.rows, r.rows, t);
    Json j{{"left", p.left}, {"right", p.right}, {"reference", ref}};
    j.update(to_json(m));
    bmats.push_back(std::move(j));
    md += render_markdown(m, p.name() + " (bands of D to " + ref + ", counts)", p.left, p.right);
  }
  doc["band_matrices"] = std::move(bmats);

  Json rmats = Json::array();
  for (const auto& p : config.rating_matrices) {
    const CountMatrix m =
        rating_crosstab(ratings_of(annotations, p.left), ratings_of(annotations, p.right));
    Json j{{"left", p.left}, {"right", p.right}};
    j.update(to_json(m));
    rmats.push_back(std::move(j));
    md += render_markdown(m, p.name() + " (panel ratings, counts)", p.left, p.right);
  }
  doc["rating_matrices"] = std::move(rmats);

  if (!config.rated_coders.empty()) {
    // Acceptability covers every rated example; distance-vs-rating only
    // those both rated and compared against the reference.
    std::vector<CoderRatings> ratings;
    for (const auto& c : config.rated_coders) ratings.push_back(ratings_of(annotations, c));
    const AcceptabilitySummary summary = acceptability_summary(ratings, "All rated coders");
    std::vector<AcceptabilityRow> rows = summary.coders;
    Json acc;
    acc["population"] = "all rated examples";
    acc["coders"] = Json::array();
    for (const auto& r : summary.coders) acc["coders"].push_back(to_json(r));
    acc["pooled"] = to_json(summary.average);
    acc["groups"] = Json::array();
    for (const auto& g : config.acceptability_groups) {
      std::vector<CoderRatings> members;
      for (const auto& c : g.coders) members.push_back(ratings_of(annotations, c));
      const auto gs = acceptability_summary(members, g.name);
      acc["groups"].push_back(to_json(gs.average));
      rows.push_back(gs.average);
    }
    doc["acceptability"] = std::move(acc);
    md += render_markdown(rows, "Acceptability of code sets (panel ratings)");

    std::vector<RatedRow> rated;
    std::size_t unrated = 0;
    for (const auto& c : config.rated_coders) {
      if (c == *config.reference_coder) continue;
      for (auto& r : rated_rows(compare(c, *config.reference_coder), annotations)) {
        if (r.rating)
          rated.push_back(std::move(r));
        else
          ++unrated;
      }
    }
    const RatingBandTable dvr = distance_vs_rating(rated, t);
    Json d;
    d["reference"] = *config.reference_coder;
    d["population"] = {{"compared_and_rated", rated.size()}, {"compared_unrated", unrated}};
    d["thresholds"] = to_json(t);
    d["rows"] = Json::array();
    for (std::size_t i = 0; i < kRatings.size(); ++i) {
      Json row = to_json(dvr.rows[i], t);
      row["rating"] = std::string(to_string(kRatings[i]));
      d["rows"].push_back(std::move(row));
    }
    doc["distance_vs_rating"] = std::move(d);
    md += render_markdown(dvr, "Distance to " + *config.reference_coder + " by panel rating");
  }
  return rep;
}

inline AnnotationSet load_annotation_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(path);
  return load_annotations(in, path);
}

/// Ingests, loads and builds the report without writing anything.
inline Report run_report(const RunConfig& config) {
  validate_run_config(config);
  const Ingested terminology = ingest(config.ingest);
  const AnnotationSet annotations = load_annotation_file(config.annotations_path);
  return build_report(config, terminology, annotations);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure(path);
  out << text;
  if (!out) throw IoFailure(path);
}

inline void write_report(const RunConfig& config, const Report& report) {
  write_text_file(config.output_path, report.json_text());
  if (config.markdown_path) write_text_file(*config.markdown_path, report.markdown);
}

}  // namespace codedist
