#pragma once

#include <string>
#include <string_view>

#include "leapgrid/grid.hpp"

namespace leapgrid {

// Parses a Matpower-style case body (baseMVA scalar plus bus/gen/branch
// matrices, columns per the Matpower 7 documentation). Produces one
// generator Injection per gen row and one load Injection per bus with a
// nonzero Pd or Qd. Tap ratios, phase shifts and bus shunts (Gs/Bs) are
// outside the supported subset and are ignored; branch status is kept
// verbatim so out-of-service rows survive the round trip.
GridCase parse_matpower_case(std::string_view text);

// Convenience wrapper: reads the file, then parse_matpower_case.
GridCase load_matpower_file(const std::string& path);

}  // namespace leapgrid
