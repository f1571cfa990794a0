#pragma once

// Inter-coder agreement evaluation: annotation loading, pairwise coder
// comparison with single/multi-finding stratification, cumulative band
// tables, micro-averaging, band and rating cross-tabulations.
//
// A gold standard is just another coder id (conventionally "GS").

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codeset.hpp"
#include "concept_id.hpp"
#include "error.hpp"
#include "hierarchy.hpp"
#include "rational.hpp"
#include "rf2.hpp"

namespace codedist {

enum class Rating { Good, Acceptable, NotAcceptable };

inline constexpr std::array<Rating, 3> kRatings{Rating::Good, Rating::Acceptable,
                                                Rating::NotAcceptable};

inline std::string_view to_string(Rating r) {
  switch (r) {
    case Rating::Good: return "good";
    case Rating::Acceptable: return "acceptable";
    case Rating::NotAcceptable: return "not_acceptable";
  }
  return {};
}

inline std::string_view display_name(Rating r) {
  switch (r) {
    case Rating::Good: return "Good";
    case Rating::Acceptable: return "Acceptable";
    case Rating::NotAcceptable: return "Not acceptable";
  }
  return {};
}

struct AnnotationRecord {
  std::string example_id;
  std::string coder_id;
  std::vector<ConceptId> raw_codes;
  std::optional<Rating> rating;
};

class AnnotationSet {
 public:
  using Key = std::pair<std::string, std::string>;  // (example, coder)

  void add(AnnotationRecord rec) {
    Key key{rec.example_id, rec.coder_id};
    if (records_.count(key))
      throw Error(ErrorKind::DuplicateRecord,
                  "duplicate annotation for example '" + key.first +
                      "' by coder '" + key.second + "'");
    coders_.insert(rec.coder_id);
    records_.emplace(std::move(key), std::move(rec));
  }

  const AnnotationRecord* find(const std::string& example,
                               const std::string& coder) const {
    auto it = records_.find({example, coder});
    return it == records_.end() ? nullptr : &it->second;
  }

  bool has_coder(const std::string& coder) const { return coders_.count(coder) != 0; }
  const std::set<std::string>& coders() const noexcept { return coders_; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Records of one coder keyed by example id.
  std::map<std::string, const AnnotationRecord*> by_coder(
      const std::string& coder) const {
    std::map<std::string, const AnnotationRecord*> out;
    for (const auto& [key, rec] : records_)
      if (key.second == coder) out.emplace(key.first, &rec);
    return out;
  }

  /// All records ordered by (example_id, coder_id).
  const std::map<Key, AnnotationRecord>& records() const noexcept {
    return records_;
  }

 private:
  std::map<Key, AnnotationRecord> records_;
  std::set<std::string> coders_;
};

namespace detail {

// One CSV record without embedded newlines; fields may be double-quoted
// with "" as the escaped quote.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      if (was_quoted) return std::nullopt;
      field += c;
    }
  }
  if (quoted) return std::nullopt;
  out.push_back(std::move(field));
  return out;
}

}  // namespace detail

inline constexpr std::string_view kAnnotationHeader =
    "example_id,coder_id,codes,rating";

/// Strict: any malformed row or duplicate (example_id, coder_id) aborts.
inline AnnotationSet load_annotations(std::istream& in,
                                      const std::string& source = "<annotations>") {
  detail::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || detail::trim(line) != kAnnotationHeader)
    throw MalformedLine(source, 1,
                        "missing header '" + std::string(kAnnotationHeader) + "'");
  AnnotationSet set;
  while (reader.next(line)) {
    if (detail::trim(line).empty()) continue;
    const std::size_t n = reader.number();
    auto fields = detail::split_csv(line);
    if (!fields) throw MalformedLine(source, n, "unbalanced quotes");
    if (fields->size() == 3) fields->emplace_back();
    if (fields->size() != 4)
      throw MalformedLine(source, n,
                          "expected 4 columns, got " + std::to_string(fields->size()));
    AnnotationRecord rec;
    rec.example_id = std::string(detail::trim((*fields)[0]));
    rec.coder_id = std::string(detail::trim((*fields)[1]));
    if (rec.example_id.empty() || rec.coder_id.empty())
      throw MalformedLine(source, n, "empty example_id or coder_id");
    const auto codes = detail::trim((*fields)[2]);
    if (codes.empty()) throw MalformedLine(source, n, "empty code list");
    for (auto part : detail::split(codes, '|')) {
      auto id = parse_concept_id(detail::trim(part));
      if (!id)
        throw MalformedLine(source, n, "invalid code '" + std::string(part) + "'");
      rec.raw_codes.push_back(*id);
    }
    const auto rating = detail::trim((*fields)[3]);
    if (rating == "good")
      rec.rating = Rating::Good;
    else if (rating == "acceptable")
      rec.rating = Rating::Acceptable;
    else if (rating == "not_acceptable")
      rec.rating = Rating::NotAcceptable;
    else if (!rating.empty())
      throw MalformedLine(source, n, "unknown rating '" + std::string(rating) + "'");
    try {
      set.add(std::move(rec));
    } catch (const Error& e) {
      throw Error(ErrorKind::DuplicateRecord,
                  source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return set;
}

enum class Stratum { SingleFinding, MultiFinding };

inline std::string_view to_string(Stratum s) {
  return s == Stratum::SingleFinding ? "single_finding" : "multi_finding";
}

struct ComparisonRow {
  std::string example_id;
  CodeSet left_set;
  CodeSet right_set;
  DistanceResult distance;
  Stratum stratum;
  Band band;
  NormalizationReport left_report;
  NormalizationReport right_report;
};

enum class ExclusionReason {
  LeftEmptyAfterNormalization,
  RightEmptyAfterNormalization,
  BothEmpty,
  MissingFromCoder,
};

inline std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::LeftEmptyAfterNormalization: return "left_empty_after_normalization";
    case ExclusionReason::RightEmptyAfterNormalization: return "right_empty_after_normalization";
    case ExclusionReason::BothEmpty: return "both_empty";
    case ExclusionReason::MissingFromCoder: return "missing_from_coder";
  }
  return {};
}

struct ExclusionRecord {
  std::string example_id;
  ExclusionReason reason;
  /// For MissingFromCoder: the coder lacking the example.
  std::string missing_coder;
  std::optional<NormalizationReport> left_report;
  std::optional<NormalizationReport> right_report;
};

struct PairComparison {
  std::string left_coder;
  std::string right_coder;
  std::vector<ComparisonRow> rows;            // sorted by example_id
  std::vector<ExclusionRecord> exclusions;    // sorted by example_id

  std::size_t universe() const { return rows.size() + exclusions.size(); }
};

/// Compares every example annotated by either coder. Examples present for
/// only one coder, or normalizing to an empty set on either side, become
/// exclusions. Throws UnknownCoder.
inline PairComparison pair_comparison(const AnnotationSet& annotations,
                                      const std::string& left_coder,
                                      const std::string& right_coder,
                                      DistanceCache& cache,
                                      DenominatorPolicy policy,
                                      const Thresholds& thresholds = {}) {
  for (const auto* c : {&left_coder, &right_coder})
    if (!annotations.has_coder(*c))
      throw Error(ErrorKind::UnknownCoder,
                  "coder '" + *c + "' does not occur in the annotations");

  PairComparison out{left_coder, right_coder, {}, {}};
  const auto left = annotations.by_coder(left_coder);
  const auto right = annotations.by_coder(right_coder);
  std::set<std::string> examples;
  for (const auto& [ex, _] : left) examples.insert(ex);
  for (const auto& [ex, _] : right) examples.insert(ex);

  const FocusView& view = cache.view();
  for (const std::string& ex : examples) {
    auto l = left.find(ex);
    auto r = right.find(ex);
    if (l == left.end() || r == right.end()) {
      out.exclusions.push_back({ex, ExclusionReason::MissingFromCoder,
                                l == left.end() ? left_coder : right_coder,
                                std::nullopt, std::nullopt});
      continue;
    }
    Normalized ln = normalize_code_set(l->second->raw_codes, view);
    Normalized rn = normalize_code_set(r->second->raw_codes, view);
    if (!ln.codes || !rn.codes) {
      const auto reason = !ln.codes && !rn.codes
                              ? ExclusionReason::BothEmpty
                              : !ln.codes ? ExclusionReason::LeftEmptyAfterNormalization
                                          : ExclusionReason::RightEmptyAfterNormalization;
      out.exclusions.push_back({ex, reason, {}, ln.report, rn.report});
      continue;
    }
    DistanceResult d = code_set_distance(*ln.codes, *rn.codes, cache, policy);
    const Stratum stratum = ln.codes->size() == 1 && rn.codes->size() == 1
                                ? Stratum::SingleFinding
                                : Stratum::MultiFinding;
    const Band band = distance_band(d, thresholds);
    out.rows.push_back({ex, std::move(*ln.codes), std::move(*rn.codes), d, stratum,
                        band, std::move(ln.report), std::move(rn.report)});
  }
  return out;
}

/// Cumulative counts: cumulative[0] counts D = 0, cumulative[i + 1] counts
/// D <= thresholds[i].
struct BandRow {
  std::size_t n = 0;
  std::vector<std::size_t> cumulative;

  friend bool operator==(const BandRow&, const BandRow&) = default;
};

/// floor(100 * count / n + 1/2), i.e. round half up.
inline int rounded_percent(std::size_t count, std::size_t n) {
  return static_cast<int>((200 * count + n) / (2 * n));
}

/// Integer percent, or an em dash when n is 0.
inline std::string render_percent(std::size_t count, std::size_t n) {
  if (n == 0) return "—";
  return std::to_string(rounded_percent(count, n));
}

inline BandRow band_row(std::span<const Rational> values, const Thresholds& t) {
  BandRow row;
  row.n = values.size();
  row.cumulative.assign(t.size() + 1, 0);
  for (const Rational& v : values) {
    if (v.numerator() == 0) ++row.cumulative[0];
    for (std::size_t i = 0; i < t.size(); ++i)
      if (v <= t[i]) ++row.cumulative[i + 1];
  }
  return row;
}

struct BandTable {
  Thresholds thresholds;
  BandRow all;
  BandRow single;
  BandRow multi;
};

inline BandTable band_table(std::span<const ComparisonRow> rows,
                            const Thresholds& thresholds = {}) {
  std::vector<Rational> all, single, multi;
  for (const auto& r : rows) {
    all.push_back(r.distance.value);
    (r.stratum == Stratum::SingleFinding ? single : multi).push_back(r.distance.value);
  }
  return {thresholds, band_row(all, thresholds), band_row(single, thresholds),
          band_row(multi, thresholds)};
}

/// Pools all rows, then tabulates: instance-weighted, not a mean of
/// per-list percentages.
inline BandTable micro_average(std::span<const std::vector<ComparisonRow>> lists,
                               const Thresholds& thresholds = {}) {
  std::vector<ComparisonRow> pooled;
  for (const auto& l : lists) pooled.insert(pooled.end(), l.begin(), l.end());
  return band_table(pooled, thresholds);
}

struct CountMatrix {
  std::vector<std::string> labels;  // shared by rows and columns
  std::vector<std::vector<std::size_t>> cells;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& row : cells)
      for (auto c : row) t += c;
    return t;
  }
};

/// Both lists are comparisons against the same reference coder. Cell (i, j)
/// counts examples in both lists whose left band is i and right band is j.
inline CountMatrix cross_band_matrix(std::span<const ComparisonRow> left_vs_ref,
                                     std::span<const ComparisonRow> right_vs_ref,
                                     const Thresholds& thresholds = {}) {
  const std::size_t k = thresholds.size();
  CountMatrix m;
  for (std::size_t i = 0; i < k + 2; ++i)
    m.labels.push_back(band_interval_label(i, thresholds));
  m.cells.assign(k + 2, std::vector<std::size_t>(k + 2, 0));
  std::map<std::string_view, const ComparisonRow*> right;
  for (const auto& r : right_vs_ref) right.emplace(r.example_id, &r);
  for (const auto& l : left_vs_ref) {
    auto it = right.find(l.example_id);
    if (it == right.end()) continue;
    const auto i = distance_band(l.distance.value, thresholds).ordinal(k);
    const auto j = distance_band(it->second->distance.value, thresholds).ordinal(k);
    ++m.cells[i][j];
  }
  return m;
}

struct CoderRatings {
  std::string coder;
  std::map<std::string, std::optional<Rating>> by_example;
};

inline CoderRatings ratings_of(const AnnotationSet& set, const std::string& coder) {
  if (!set.has_coder(coder))
    throw Error(ErrorKind::UnknownCoder,
                "coder '" + coder + "' does not occur in the annotations");
  CoderRatings out{coder, {}};
  for (const auto& [ex, rec] : set.by_coder(coder)) out.by_example.emplace(ex, rec->rating);
  return out;
}

namespace detail {

inline std::size_t rating_index(Rating r) { return static_cast<std::size_t>(r); }

inline Error missing_rating(const std::string& example, const std::string& coder) {
  return Error(ErrorKind::MissingRating,
               "example '" + example + "' has no rating from coder '" + coder + "'");
}

}  // namespace detail

/// 3x3 counts over examples rated by both coders (inner join on example id).
/// Throws MissingRating when a joined example lacks a rating on either side.
inline CountMatrix rating_crosstab(const CoderRatings& left, const CoderRatings& right) {
  CountMatrix m;
  for (Rating r : kRatings) m.labels.emplace_back(display_name(r));
  m.cells.assign(3, std::vector<std::size_t>(3, 0));
  for (const auto& [ex, lr] : left.by_example) {
    auto it = right.by_example.find(ex);
    if (it == right.by_example.end()) continue;
    if (!lr) throw detail::missing_rating(ex, left.coder);
    if (!it->second) throw detail::missing_rating(ex, right.coder);
    ++m.cells[detail::rating_index(*lr)][detail::rating_index(*it->second)];
  }
  return m;
}

struct AcceptabilityRow {
  std::string name;
  std::size_t n = 0;
  std::size_t good = 0;
  std::size_t acceptable = 0;
  std::size_t not_acceptable = 0;

  std::size_t good_or_acceptable() const { return good + acceptable; }
};

struct AcceptabilitySummary {
  std::vector<AcceptabilityRow> coders;
  AcceptabilityRow average;  // pooled over every coder's rated examples
};

/// Unrated examples are skipped.
inline AcceptabilitySummary acceptability_summary(std::span<const CoderRatings> coders,
                                                  std::string average_name = "Average") {
  AcceptabilitySummary out;
  out.average.name = std::move(average_name);
  for (const auto& c : coders) {
    AcceptabilityRow row{c.coder};
    for (const auto& [_, r] : c.by_example) {
      if (!r) continue;
      ++row.n;
      switch (*r) {
        case Rating::Good: ++row.good; break;
        case Rating::Acceptable: ++row.acceptable; break;
        case Rating::NotAcceptable: ++row.not_acceptable; break;
      }
    }
    out.average.n += row.n;
    out.average.good += row.good;
    out.average.acceptable += row.acceptable;
    out.average.not_acceptable += row.not_acceptable;
    out.coders.push_back(std::move(row));
  }
  return out;
}

struct RatedRow {
  std::string coder;
  std::string example_id;
  Rational distance;
  std::optional<Rating> rating;
};

/// Rows of a comparison against the reference, paired with the rating the
/// non-reference coder received for each example. Unrated examples keep an
/// empty rating.
inline std::vector<RatedRow> rated_rows(const PairComparison& vs_reference,
                                        const AnnotationSet& annotations) {
  std::vector<RatedRow> out;
  for (const auto& row : vs_reference.rows) {
    const auto* rec = annotations.find(row.example_id, vs_reference.left_coder);
    out.push_back({vs_reference.left_coder, row.example_id, row.distance.value,
                   rec ? rec->rating : std::nullopt});
  }
  return out;
}

struct RatingBandTable {
  Thresholds thresholds;
  std::array<BandRow, 3> rows;  // indexed like kRatings
};

/// Pools rows across coders and tabulates the distance bands per rating.
/// Throws MissingRating for an unrated row.
inline RatingBandTable distance_vs_rating(std::span<const RatedRow> rows,
                                          const Thresholds& thresholds = {}) {
  std::array<std::vector<Rational>, 3> values;
  for (const auto& r : rows) {
    if (!r.rating) throw detail::missing_rating(r.example_id, r.coder);
    values[detail::rating_index(*r.rating)].push_back(r.distance);
  }
  RatingBandTable t{thresholds, {}};
  for (std::size_t i = 0; i < 3; ++i) t.rows[i] = band_row(values[i], thresholds);
  return t;
}

}  // namespace codedist
