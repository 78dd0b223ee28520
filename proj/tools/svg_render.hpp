#pragma once

#include <string>

#include "markoff/farey.hpp"
#include "markoff/markoff_map.hpp"

namespace markoff_lab {

/// Upper-half-plane picture of the Farey tessellation restricted to the real
/// window [lo, hi]: geodesic arcs between neighbor regions with fib <= depth,
/// plus the Ford circle of each region filled by a color ramp on
/// clamp(log+ |phi|, 0, cap) / cap.  Byte-deterministic for fixed inputs.
std::string render_svg(const markoff::MuMarkoffMap& m, long long depth,
                       const markoff::FareyFraction& lo,
                       const markoff::FareyFraction& hi, double cap);

} // namespace markoff_lab
