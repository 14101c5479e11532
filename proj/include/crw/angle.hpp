#pragma once

#include <string>
#include <string_view>

namespace crw {

enum class AngleUnit { kRadians, kPi };

// Accepts plain numbers (read in `unit`) and explicit multiples of pi:
// "0.25pi", "pi/3", "-5pi/3", "pi". Throws Error(kConfig) on malformed text.
double parse_angle(std::string_view text, AngleUnit unit = AngleUnit::kRadians);

// Shortest decimal radians that parse back to the identical double.
std::string format_angle(double radians);

AngleUnit parse_angle_unit(std::string_view s);  // "rad" | "pi"
std::string_view to_string(AngleUnit u);

}  // namespace crw
