#pragma once

// Code-set normalization and the average-minimum-distance between two code
// sets:
//
//   D(X, Y) = ( sum_{x in X} min_{y in Y} d(x, y)
//             + sum_{y in Y} min_{x in X} d(y, x) ) / denominator
//
// where d is the common-ancestor concept distance. The denominator is
// |X| + |Y| (term_count, the number of min-terms) or |X ∪ Y| (set_union).
// The two policies agree whenever X and Y are disjoint. Values are exact
// rationals so band boundaries never depend on rounding.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concept_id.hpp"
#include "error.hpp"
#include "hierarchy.hpp"
#include "rational.hpp"

namespace codedist {

/// Non-empty, sorted, duplicate-free set of concept ids.
class CodeSet {
 public:
  explicit CodeSet(std::vector<ConceptId> codes) : codes_(std::move(codes)) {
    std::sort(codes_.begin(), codes_.end());
    codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
    if (codes_.empty())
      throw Error(ErrorKind::EmptyCodeSet, "a code set must not be empty");
  }
  CodeSet(std::initializer_list<ConceptId> codes)
      : CodeSet(std::vector<ConceptId>(codes)) {}

  std::span<const ConceptId> codes() const noexcept { return codes_; }
  std::size_t size() const noexcept { return codes_.size(); }
  bool contains(ConceptId id) const {
    return std::binary_search(codes_.begin(), codes_.end(), id);
  }

  friend bool operator==(const CodeSet&, const CodeSet&) = default;

 private:
  std::vector<ConceptId> codes_;
};

inline std::string to_string(const CodeSet& s) {
  std::string out;
  for (ConceptId c : s.codes()) {
    if (!out.empty()) out += '|';
    out += to_string(c);
  }
  return out;
}

struct NormalizationReport {
  std::size_t kept = 0;
  std::vector<ConceptId> dropped_unknown;
  std::vector<ConceptId> dropped_out_of_focus;
  std::size_t dropped_duplicates = 0;
  bool empty_after_normalization = false;

  std::size_t input_length() const {
    return kept + dropped_unknown.size() + dropped_out_of_focus.size() +
           dropped_duplicates;
  }
};

struct Normalized {
  std::optional<CodeSet> codes;
  NormalizationReport report;
};

/// Deduplicates raw codes (first occurrence wins), then drops codes absent
/// from the graph and codes outside the focus view. Anomalies are reported,
/// never thrown. An empty result means the example has to be excluded.
inline Normalized normalize_code_set(std::span<const ConceptId> raw,
                                     const FocusView& view) {
  Normalized out;
  std::vector<ConceptId> seen;
  std::vector<ConceptId> kept;
  for (ConceptId c : raw) {
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
      ++out.report.dropped_duplicates;
      continue;
    }
    seen.push_back(c);
    if (!view.graph().contains(c))
      out.report.dropped_unknown.push_back(c);
    else if (!view.contains(c))
      out.report.dropped_out_of_focus.push_back(c);
    else
      kept.push_back(c);
  }
  out.report.kept = kept.size();
  out.report.empty_after_normalization = kept.empty();
  if (!kept.empty()) out.codes.emplace(std::move(kept));
  return out;
}

enum class DenominatorPolicy { TermCount, SetUnion };

inline std::string_view to_string(DenominatorPolicy p) {
  return p == DenominatorPolicy::TermCount ? "term_count" : "set_union";
}

inline std::optional<DenominatorPolicy> parse_policy(std::string_view s) {
  if (s == "term_count") return DenominatorPolicy::TermCount;
  if (s == "set_union") return DenominatorPolicy::SetUnion;
  return std::nullopt;
}

/// What the policy choice means, recorded verbatim in reports.
inline constexpr std::string_view kDenominatorNote =
    "The hop sum has |X|+|Y| min-terms. term_count divides by |X|+|Y| (the "
    "mean of the min-terms); set_union divides by |X ∪ Y|. They differ "
    "exactly when X and Y share a code and the hop sum is nonzero, and then "
    "set_union is larger. Example: X={239873007,443524000}, Y={239873007} under "
    "443524000 is_a 396275006 and 239873007 is_a 396275006 has hop sum 2, "
    "giving 2/3 under term_count and 1 under set_union.";

struct DistanceResult {
  Rational value;
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;
  DenominatorPolicy policy = DenominatorPolicy::TermCount;
  bool exact_match = false;
};

namespace detail {

// Sum of row minima plus sum of column minima of the |X| x |Y| distance
// matrix, each pair computed once.
inline std::int64_t min_term_sum(const CodeSet& x, const CodeSet& y, DistanceCache& cache) {
  std::vector<Hops> col(y.size(), std::numeric_limits<Hops>::max());
  std::int64_t sum = 0;
  for (ConceptId a : x.codes()) {
    Hops row = std::numeric_limits<Hops>::max();
    for (std::size_t j = 0; j < y.size(); ++j) {
      const Hops d = cache.distance(a, y.codes()[j]);
      row = std::min(row, d);
      col[j] = std::min(col[j], d);
    }
    sum += row;
  }
  for (Hops c : col) sum += c;
  return sum;
}

inline std::size_t union_size(const CodeSet& a, const CodeSet& b) {
  std::size_t shared = 0;
  for (ConceptId c : a.codes()) shared += b.contains(c);
  return a.size() + b.size() - shared;
}

}  // namespace detail

/// Throws OutOfFocus when either set holds a code outside the cache's view.
inline DistanceResult code_set_distance(const CodeSet& x, const CodeSet& y,
                                        DistanceCache& cache,
                                        DenominatorPolicy policy) {
  DistanceResult r;
  r.policy = policy;
  r.numerator = detail::min_term_sum(x, y, cache);
  r.denominator = static_cast<std::int64_t>(
      policy == DenominatorPolicy::TermCount ? x.size() + y.size()
                                             : detail::union_size(x, y));
  r.value = Rational(r.numerator, r.denominator);
  r.exact_match = r.numerator == 0;
  return r;
}

inline DistanceResult code_set_distance(const CodeSet& x, const CodeSet& y,
                                        const FocusView& view,
                                        DenominatorPolicy policy) {
  DistanceCache cache(view);
  return code_set_distance(x, y, cache, policy);
}

/// Strictly increasing positive upper bounds of the distance bands.
class Thresholds {
 public:
  Thresholds() : bounds_{Rational(1), Rational(2), Rational(3)} {}

  explicit Thresholds(std::vector<Rational> bounds) : bounds_(std::move(bounds)) {
    if (bounds_.empty())
      throw Error(ErrorKind::InvalidThresholds, "no thresholds given");
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      if (bounds_[i] <= 0)
        throw Error(ErrorKind::InvalidThresholds,
                    "threshold " + codedist::to_string(bounds_[i]) +
                        " is not positive");
      if (i && bounds_[i] <= bounds_[i - 1])
        throw Error(ErrorKind::InvalidThresholds,
                    "thresholds must be strictly increasing");
    }
  }

  std::span<const Rational> bounds() const noexcept { return bounds_; }
  std::size_t size() const noexcept { return bounds_.size(); }
  const Rational& operator[](std::size_t i) const { return bounds_[i]; }

  friend bool operator==(const Thresholds&, const Thresholds&) = default;

 private:
  std::vector<Rational> bounds_;
};

/// Exact, Within(i) for the smallest bound i with value <= bound, or Beyond.
struct Band {
  enum class Kind { Exact, Within, Beyond };
  Kind kind = Kind::Exact;
  std::size_t bound = 0;

  /// 0 for Exact, 1..k for Within, k+1 for Beyond (k thresholds).
  std::size_t ordinal(std::size_t k) const {
    switch (kind) {
      case Kind::Exact: return 0;
      case Kind::Within: return bound + 1;
      case Kind::Beyond: return k + 1;
    }
    return 0;
  }

  friend bool operator==(const Band&, const Band&) = default;
};

inline Band distance_band(const Rational& value, const Thresholds& t) {
  if (value.numerator() == 0) return {Band::Kind::Exact, 0};
  for (std::size_t i = 0; i < t.size(); ++i)
    if (value <= t[i]) return {Band::Kind::Within, i};
  return {Band::Kind::Beyond, 0};
}

inline Band distance_band(const DistanceResult& r, const Thresholds& t = {}) {
  return distance_band(r.value, t);
}

/// Cumulative label: "exact", "<=2", ">3".
inline std::string band_label(const Band& b, const Thresholds& t) {
  switch (b.kind) {
    case Band::Kind::Exact: return "exact";
    case Band::Kind::Within: return "<=" + codedist::to_string(t[b.bound]);
    case Band::Kind::Beyond:
      return ">" + codedist::to_string(t[t.size() - 1]);
  }
  return {};
}

/// Interval label used by band matrices: "Exact", "0 < D <= 1", "D > 3".
inline std::string band_interval_label(std::size_t ordinal, const Thresholds& t) {
  if (ordinal == 0) return "Exact";
  if (ordinal > t.size()) return "D > " + codedist::to_string(t[t.size() - 1]);
  const std::string lower =
      ordinal == 1 ? std::string("0") : codedist::to_string(t[ordinal - 2]);
  return lower + " < D <= " + codedist::to_string(t[ordinal - 1]);
}

}  // namespace codedist
