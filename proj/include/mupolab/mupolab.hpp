#pragma once

/// @file mupolab.hpp
/// @brief Umbrella header.

#include "contfrac.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "hat.hpp"
#include "montecarlo.hpp"
#include "mupo.hpp"
#include "stem.hpp"
#include "surd.hpp"
#include "verify.hpp"

namespace mupolab {

inline constexpr const char* version = "0.1.0";

}  // namespace mupolab
