#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rocklab {

// Extended real line [-inf, +inf] with minimization-oriented arithmetic:
// a + (+inf) = +inf for every a, including a = -inf. An infeasible term
// therefore dominates any objective sum.
class ExtReal {
public:
  constexpr ExtReal() : v_(0.0) {}
  constexpr ExtReal(double v) : v_(v) {
    if (v != v) throw std::invalid_argument("ExtReal: NaN payload");
  }

  static constexpr ExtReal pos_inf() { return ExtReal(std::numeric_limits<double>::infinity()); }
  static constexpr ExtReal neg_inf() { return ExtReal(-std::numeric_limits<double>::infinity()); }

  constexpr bool is_pos_inf() const { return v_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_neg_inf() const { return v_ == -std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const { return !is_pos_inf() && !is_neg_inf(); }

  // Raw value; +-inf map to the IEEE infinities.
  constexpr double value() const { return v_; }
  constexpr double finite_value() const {
    if (!is_finite()) throw std::logic_error("ExtReal: finite_value() on infinite value");
    return v_;
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend constexpr auto operator<=>(ExtReal a, ExtReal b) { return a.v_ <=> b.v_; }

private:
  double v_;
};

// Total addition: +inf dominates, then -inf, else the finite sum.
inline ExtReal ext_add(ExtReal a, ExtReal b) {
  if (a.is_pos_inf() || b.is_pos_inf()) return ExtReal::pos_inf();
  if (a.is_neg_inf() || b.is_neg_inf()) return ExtReal::neg_inf();
  return ExtReal(a.value() + b.value());
}

// Nonnegative scaling with 0 * (+-inf) = 0, so a zero-weight penalty term
// drops out exactly. Rejects t < 0.
inline ExtReal ext_scale(double t, ExtReal a) {
  if (!(t >= 0.0)) throw std::invalid_argument("ext_scale: negative or NaN factor");
  if (t == 0.0) return ExtReal(0.0);
  if (!a.is_finite()) return a;
  return ExtReal(t * a.value());
}

inline ExtReal ext_neg(ExtReal a) {
  if (a.is_pos_inf()) return ExtReal::neg_inf();
  if (a.is_neg_inf()) return ExtReal::pos_inf();
  return ExtReal(-a.value());
}

// a - b under the same convention: a + (-b).
inline ExtReal ext_sub(ExtReal a, ExtReal b) { return ext_add(a, ext_neg(b)); }

inline ExtReal operator+(ExtReal a, ExtReal b) { return ext_add(a, b); }
inline ExtReal& operator+=(ExtReal& a, ExtReal b) { return a = ext_add(a, b); }

// Renders "inf" / "-inf", otherwise a shortest decimal that parses back
// to the identical double.
inline std::string to_string(ExtReal a) {
  if (a.is_pos_inf()) return "inf";
  if (a.is_neg_inf()) return "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), a.value());
  (void)ec;
  return std::string(buf, ptr);
}

inline ExtReal parse_ext_real(std::string_view s) {
  if (s == "inf" || s == "+inf") return ExtReal::pos_inf();
  if (s == "-inf") return ExtReal::neg_inf();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("parse_ext_real: bad literal '" + std::string(s) + "'");
  return ExtReal(v);
}

}  // namespace rocklab
