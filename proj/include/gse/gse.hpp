#pragma once

// Umbrella header.

#include "gse/anisotropy.hpp"
#include "gse/core.hpp"
#include "gse/errors.hpp"
#include "gse/fitting.hpp"
#include "gse/io.hpp"
#include "gse/lamb_pv.hpp"
#include "gse/multipoint.hpp"
#include "gse/nested.hpp"
#include "gse/parallel.hpp"
#include "gse/single.hpp"
#include "gse/special_functions.hpp"
#include "gse/sweep_map.hpp"
