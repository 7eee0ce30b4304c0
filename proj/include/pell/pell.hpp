#pragma once

// Umbrella header for the library part (the JSON layer lives in json_io.hpp).

#include "pell/conditions.hpp"
#include "pell/error.hpp"
#include "pell/integral.hpp"
#include "pell/lame.hpp"
#include "pell/p_range.hpp"
#include "pell/parallel.hpp"
#include "pell/solvability.hpp"
#include "pell/tensor.hpp"
