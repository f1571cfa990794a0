#pragma once

// Terminology ingestion: SNOMED CT RF2 snapshot files (concepts and
// relationships) and a plain child,parent edge-list CSV.
//
// RF2 columns are read by position from the published snapshot layout:
//   concepts:      id effectiveTime active moduleId definitionStatusId
//   relationships: id effectiveTime active moduleId sourceId destinationId
//                  relationshipGroup typeId characteristicTypeId modifierId
// Only id/active (concepts) and active/sourceId/destinationId/typeId/
// characteristicTypeId (relationships) are consulted.

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "concept_id.hpp"
#include "error.hpp"
#include "hierarchy.hpp"

namespace codedist {

inline constexpr ConceptId kIsA{116680003};
inline constexpr std::string_view kInferredRelationship = "900000000000011006";
inline constexpr std::string_view kStatedRelationship = "900000000000010007";

enum class ParseMode { Strict, Lenient };

struct ParseStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  /// First few malformed-line diagnostics collected in lenient mode.
  std::vector<std::string> warnings;
};

namespace detail {

inline constexpr std::size_t kMaxWarnings = 20;

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Line reader that strips a trailing CR and a leading UTF-8 BOM.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    return true;
  }

  std::size_t number() const noexcept { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

// Throws in strict mode, records and returns in lenient mode.
inline void malformed(ParseMode mode, ParseStats& stats,
                      const std::string& source, std::size_t line,
                      std::string reason) {
  if (mode == ParseMode::Strict)
    throw MalformedLine(source, line, std::move(reason));
  ++stats.malformed;
  if (stats.warnings.size() < kMaxWarnings)
    stats.warnings.push_back(source + ":" + std::to_string(line) + ": " +
                             reason);
}

}  // namespace detail

struct ConceptRow {
  ConceptId id;
  bool active = false;
};

inline std::vector<ConceptRow> parse_rf2_concepts(
    std::istream& in, ParseMode mode = ParseMode::Strict,
    ParseStats* stats = nullptr, const std::string& source = "<concepts>") {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  detail::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || detail::split(line, '\t').front() != "id")
    throw MalformedLine(source, 1, "missing RF2 header starting with 'id'");

  std::vector<ConceptRow> rows;
  while (reader.next(line)) {
    ++st.lines;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() < 3) {
      detail::malformed(mode, st, source, reader.number(),
                        "expected at least 3 tab-separated columns, got " +
                            std::to_string(cols.size()));
      continue;
    }
    auto id = parse_concept_id(cols[0]);
    if (!id) {
      detail::malformed(mode, st, source, reader.number(),
                        "non-numeric concept id '" + std::string(cols[0]) + "'");
      continue;
    }
    rows.push_back({*id, cols[2] == "1"});
  }
  return rows;
}

enum class RelationshipSelector { Inferred, Stated, Any };

inline std::string_view to_string(RelationshipSelector s) {
  switch (s) {
    case RelationshipSelector::Inferred: return "inferred";
    case RelationshipSelector::Stated: return "stated";
    case RelationshipSelector::Any: return "any";
  }
  return {};
}

inline std::optional<RelationshipSelector> parse_selector(std::string_view s) {
  if (s == "inferred") return RelationshipSelector::Inferred;
  if (s == "stated") return RelationshipSelector::Stated;
  if (s == "any") return RelationshipSelector::Any;
  return std::nullopt;
}

/// Active is-a rows whose characteristic type matches the selector, as
/// (sourceId, destinationId) edges.
inline std::vector<Edge> parse_rf2_relationships(
    std::istream& in, RelationshipSelector selector,
    ParseMode mode = ParseMode::Strict, ParseStats* stats = nullptr,
    const std::string& source = "<relationships>") {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  detail::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || detail::split(line, '\t').front() != "id")
    throw MalformedLine(source, 1, "missing RF2 header starting with 'id'");

  const std::string is_a = to_string(kIsA);
  std::vector<Edge> edges;
  while (reader.next(line)) {
    ++st.lines;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() < 9) {
      detail::malformed(mode, st, source, reader.number(),
                        "expected at least 9 tab-separated columns, got " +
                            std::to_string(cols.size()));
      continue;
    }
    auto child = parse_concept_id(cols[4]);
    auto parent = parse_concept_id(cols[5]);
    if (!child || !parent) {
      detail::malformed(mode, st, source, reader.number(),
                        "non-numeric sourceId or destinationId");
      continue;
    }
    if (cols[2] != "1" || cols[7] != is_a) continue;
    const auto ct = cols[8];
    const bool match =
        (selector != RelationshipSelector::Stated && ct == kInferredRelationship) ||
        (selector != RelationshipSelector::Inferred && ct == kStatedRelationship);
    if (match) edges.push_back({*child, *parent});
  }
  return edges;
}

/// Edge-list content. A row with an empty parent_id declares a concept that
/// takes part in no edge, so graphs with isolated concepts survive a
/// write/read round trip.
struct EdgeList {
  std::vector<Edge> edges;
  std::vector<ConceptId> standalone;
};

inline constexpr std::string_view kEdgeListHeader = "child_id,parent_id";

inline EdgeList parse_edge_list(std::istream& in,
                                ParseMode mode = ParseMode::Strict,
                                ParseStats* stats = nullptr,
                                const std::string& source = "<edges>") {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  detail::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || detail::trim(line) != kEdgeListHeader)
    throw MalformedLine(source, 1,
                        "missing header '" + std::string(kEdgeListHeader) + "'");

  EdgeList out;
  while (reader.next(line)) {
    ++st.lines;
    auto text = detail::trim(line);
    if (text.empty()) continue;
    auto cols = detail::split(text, ',');
    if (cols.size() != 2) {
      detail::malformed(mode, st, source, reader.number(),
                        "expected 2 comma-separated columns, got " +
                            std::to_string(cols.size()));
      continue;
    }
    auto child = parse_concept_id(detail::trim(cols[0]));
    auto parent_text = detail::trim(cols[1]);
    if (!child) {
      detail::malformed(mode, st, source, reader.number(),
                        "non-numeric child_id '" + std::string(cols[0]) + "'");
      continue;
    }
    if (parent_text.empty()) {
      out.standalone.push_back(*child);
      continue;
    }
    auto parent = parse_concept_id(parent_text);
    if (!parent) {
      detail::malformed(mode, st, source, reader.number(),
                        "non-numeric parent_id '" + std::string(parent_text) + "'");
      continue;
    }
    out.edges.push_back({*child, *parent});
  }
  return out;
}

inline void write_edge_list(const HierarchyGraph& g, std::ostream& out) {
  out << kEdgeListHeader << '\n';
  for (const Edge& e : g.edges()) out << e.child << ',' << e.parent << '\n';
  for (HierarchyGraph::Index i = 0; i < g.concept_count(); ++i)
    if (g.parents(i).empty() && g.children(i).empty())
      out << g.id_at(i) << ",\n";
}

enum class SourceKind { Rf2Snapshot, EdgeList };

struct IngestConfig {
  SourceKind source_kind = SourceKind::EdgeList;
  std::string concept_path;       // rf2 only
  std::string relationship_path;  // rf2 relationships, or the edge list
  RelationshipSelector selector = RelationshipSelector::Inferred;
  bool include_inactive = false;
  ParseMode mode = ParseMode::Strict;

  static IngestConfig edge_list(std::string path) {
    IngestConfig c;
    c.source_kind = SourceKind::EdgeList;
    c.relationship_path = std::move(path);
    return c;
  }

  static IngestConfig rf2(std::string concepts, std::string relationships,
                          RelationshipSelector selector =
                              RelationshipSelector::Inferred) {
    IngestConfig c;
    c.source_kind = SourceKind::Rf2Snapshot;
    c.concept_path = std::move(concepts);
    c.relationship_path = std::move(relationships);
    c.selector = selector;
    return c;
  }
};

struct IngestReport {
  std::size_t concepts_read = 0;
  std::size_t inactive_excluded = 0;
  std::size_t edges_read = 0;
  std::size_t edges_dropped = 0;
  std::size_t malformed_lines = 0;
  std::vector<std::string> warnings;
};

struct Ingested {
  HierarchyGraph graph;
  IngestReport report;
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  if (path.empty()) throw IoFailure(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(path);
  return in;
}

inline void absorb(IngestReport& r, const ParseStats& st) {
  r.malformed_lines += st.malformed;
  r.warnings.insert(r.warnings.end(), st.warnings.begin(), st.warnings.end());
}

}  // namespace detail

/// Reads the configured files and builds a validated graph. Inactive RF2
/// concepts are excluded unless include_inactive is set; edges touching an
/// excluded concept are dropped and counted. Edges naming a concept that
/// does not appear in the concepts file at all still fail as DanglingEdge.
inline Ingested ingest(const IngestConfig& config) {
  Ingested out;
  IngestReport& r = out.report;

  if (config.source_kind == SourceKind::EdgeList) {
    auto in = detail::open_input(config.relationship_path);
    ParseStats st;
    EdgeList list = parse_edge_list(in, config.mode, &st, config.relationship_path);
    detail::absorb(r, st);
    std::vector<ConceptId> concepts = std::move(list.standalone);
    concepts.reserve(concepts.size() + 2 * list.edges.size());
    for (const Edge& e : list.edges) {
      concepts.push_back(e.child);
      concepts.push_back(e.parent);
    }
    r.edges_read = list.edges.size();
    out.graph = build_hierarchy(std::move(concepts), std::move(list.edges));
    r.concepts_read = out.graph.concept_count();
    return out;
  }

  auto concept_in = detail::open_input(config.concept_path);
  auto rel_in = detail::open_input(config.relationship_path);
  ParseStats cst;
  auto rows = parse_rf2_concepts(concept_in, config.mode, &cst, config.concept_path);
  ParseStats rst;
  auto edges = parse_rf2_relationships(rel_in, config.selector, config.mode, &rst,
                                       config.relationship_path);
  detail::absorb(r, cst);
  detail::absorb(r, rst);

  r.concepts_read = rows.size();
  r.edges_read = edges.size();
  std::vector<ConceptId> concepts;
  std::unordered_set<ConceptId> excluded;
  concepts.reserve(rows.size());
  for (const ConceptRow& row : rows) {
    if (row.active || config.include_inactive) {
      concepts.push_back(row.id);
    } else {
      ++r.inactive_excluded;
      excluded.insert(row.id);
    }
  }
  // A concept listed both active and inactive counts as active.
  for (ConceptId c : concepts) excluded.erase(c);

  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (const Edge& e : edges) {
    if (excluded.count(e.child) || excluded.count(e.parent))
      ++r.edges_dropped;
    else
      kept.push_back(e);
  }
  out.graph = build_hierarchy(std::move(concepts), std::move(kept));
  return out;
}

}  // namespace codedist
