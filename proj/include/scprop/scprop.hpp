#pragma once

#include "errors.hpp"
#include "grid.hpp"
#include "phase_complex.hpp"
#include "linear_metaplectic.hpp"
#include "kerr_system.hpp"
#include "quantum_reference.hpp"
#include "root_search.hpp"
#include "semiclassical.hpp"
#include "caustics.hpp"
#include "io.hpp"
