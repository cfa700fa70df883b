/// \file
/// Umbrella header for the library (the CLI headers under cli/ are separate).
#ifndef ERRBOUND_ERRBOUND_HPP
#define ERRBOUND_ERRBOUND_HPP

#include "errors.hpp"
#include "ext_real.hpp"
#include "lp.hpp"
#include "geometry.hpp"
#include "convex_model.hpp"
#include "sphere_min.hpp"
#include "moduli.hpp"
#include "hoffman.hpp"
#include "stability.hpp"
#include "oracle.hpp"

#endif
