#pragma once

// Umbrella header.

#include "cstv/error.hpp"
#include "cstv/planar.hpp"
#include "cstv/quaternion.hpp"
#include "cstv/image.hpp"
#include "cstv/kernel.hpp"
#include "cstv/spectral.hpp"
#include "cstv/blur.hpp"
#include "cstv/regularizers.hpp"
#include "cstv/solver.hpp"
#include "cstv/metrics.hpp"
#include "cstv/degrade.hpp"
#include "cstv/tune.hpp"
