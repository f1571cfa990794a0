#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace codedist {

/// Terminology identifier (an SCTID for SNOMED CT). Valid ids are > 0;
/// a default-constructed ConceptId is the invalid sentinel 0.
struct ConceptId {
  std::uint64_t value = 0;

  constexpr ConceptId() = default;
  constexpr explicit ConceptId(std::uint64_t v) : value(v) {}

  constexpr bool valid() const noexcept { return value > 0; }

  friend constexpr auto operator<=>(ConceptId, ConceptId) = default;
};

inline std::ostream& operator<<(std::ostream& os, ConceptId id) {
  return os << id.value;
}

inline std::string to_string(ConceptId id) { return std::to_string(id.value); }

/// Parses a strictly positive decimal id. Surrounding whitespace is not
/// accepted; callers trim first.
inline std::optional<ConceptId> parse_concept_id(std::string_view text) {
  std::uint64_t v = 0;
  if (text.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v == 0)
    return std::nullopt;
  return ConceptId{v};
}

/// One is-a edge, directed from the subclass to its direct superclass.
struct Edge {
  ConceptId child;
  ConceptId parent;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

inline std::string to_string(const Edge& e) {
  return "(" + to_string(e.child) + " -> " + to_string(e.parent) + ")";
}

}  // namespace codedist

template <>
struct std::hash<codedist::ConceptId> {
  std::size_t operator()(codedist::ConceptId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
