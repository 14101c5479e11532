#include "crw/angle.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

#include "crw/core.hpp"

namespace crw {

namespace {

[[noreturn]] void bad(std::string_view text, std::string_view why) {
  fail(ErrorCode::kConfig, fmt::format("invalid angle '{}': {}", text, why));
}

double parse_number(std::string_view full, std::string_view s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad(full, "not a number");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_angle(std::string_view text, AngleUnit unit) {
  const auto s = trim(text);
  if (s.empty()) bad(text, "empty");
  const auto pos = s.find("pi");
  if (pos == std::string_view::npos) {
    const double v = parse_number(text, s);
    return unit == AngleUnit::kPi ? v * kPi : v;
  }
  // [coefficient]pi[/denominator]
  auto coef_text = trim(s.substr(0, pos));
  if (!coef_text.empty() && coef_text.back() == '*') coef_text = trim(coef_text.substr(0, coef_text.size() - 1));
  double coef = 1.0;
  if (coef_text == "-")
    coef = -1.0;
  else if (coef_text == "+")
    coef = 1.0;
  else if (!coef_text.empty())
    coef = parse_number(text, coef_text[0] == '+' ? coef_text.substr(1) : coef_text);
  auto rest = trim(s.substr(pos + 2));
  double denom = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') bad(text, "expected '/' after pi");
    denom = parse_number(text, trim(rest.substr(1)));
    if (denom == 0.0) bad(text, "division by zero");
  }
  return denom == 1.0 ? coef * kPi : coef * kPi / denom;
}

std::string format_angle(double radians) { return fmt::format("{}", radians); }

AngleUnit parse_angle_unit(std::string_view s) {
  if (s == "rad") return AngleUnit::kRadians;
  if (s == "pi") return AngleUnit::kPi;
  fail(ErrorCode::kConfig, fmt::format("angle unit must be 'rad' or 'pi', got '{}'", s));
}

std::string_view to_string(AngleUnit u) { return u == AngleUnit::kPi ? "pi" : "rad"; }

}  // namespace crw
