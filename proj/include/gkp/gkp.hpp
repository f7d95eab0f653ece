#pragma once

#include "gkp/errors.hpp"
#include "gkp/linalg.hpp"
#include "gkp/numerics.hpp"
#include "gkp/geometry.hpp"
#include "gkp/codes.hpp"
#include "gkp/clifford.hpp"
#include "gkp/circuit.hpp"
#include "gkp/noise.hpp"
#include "gkp/approxqec.hpp"
#include "gkp/readout.hpp"
#include "gkp/oracle.hpp"

namespace gkp {
inline constexpr const char* kVersion = "0.1.0";
}
