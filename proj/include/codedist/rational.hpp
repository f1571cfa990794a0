#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace codedist {

// Note: with Boost 1.74 under C++20, `r == 0` and `r != 0` against a plain
// integer recurse forever (rewritten comparison candidates). Compare
// numerator() or a Rational instead.
using Rational = boost::rational<std::int64_t>;

/// "2/3", or "1" when the denominator is 1.
inline std::string to_string(const Rational& r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
  return s;
}

/// Accepts "n", "n/d" and finite decimals such as "1.5".
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto parse_int = [](std::string_view t) -> std::optional<std::int64_t> {
    std::int64_t v = 0;
    if (t.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) return std::nullopt;
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto n = parse_int(text.substr(0, slash));
    auto d = parse_int(text.substr(slash + 1));
    if (!n || !d || *d <= 0) return std::nullopt;
    return Rational(*n, *d);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 12 || frac.front() == '-' ||
        frac.front() == '+')
      return std::nullopt;
    bool negative = !whole.empty() && whole.front() == '-';
    auto w = whole.empty() || whole == "-" ? std::optional<std::int64_t>(0)
                                           : parse_int(whole);
    auto f = parse_int(frac);
    if (!w || !f) return std::nullopt;
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Rational r(*w < 0 ? -*w : *w);
    r += Rational(*f, scale);
    return negative ? -r : r;
  }
  auto n = parse_int(text);
  if (!n) return std::nullopt;
  return Rational(*n);
}

}  // namespace codedist
