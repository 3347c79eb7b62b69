#pragma once

// Umbrella header for the npspec library.

#include "npspec/assembly.hpp"
#include "npspec/ball_analytic.hpp"
#include "npspec/curve.hpp"
#include "npspec/ellipse_analytic.hpp"
#include "npspec/errors.hpp"
#include "npspec/green.hpp"
#include "npspec/grid.hpp"
#include "npspec/io.hpp"
#include "npspec/resonance.hpp"
#include "npspec/symmetrization.hpp"
