#pragma once

// Best approximation of finitely-supported vector-valued functions by
// simple functions with at most k values, in L^p norms built over a norm
// on R^d. Header-only; include this umbrella or the individual modules.

#define LPQUANT_VERSION "0.1.0"

#include "core.hpp"
#include "io.hpp"
#include "norms.hpp"
#include "oracle.hpp"
#include "pmean.hpp"
#include "quantizer.hpp"
#include "simple_function.hpp"
#include "space.hpp"
#include "voronoi.hpp"
