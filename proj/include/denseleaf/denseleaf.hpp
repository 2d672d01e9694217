#pragma once

#include "denseleaf/dataset.hpp"
#include "denseleaf/densities.hpp"
#include "denseleaf/grid_density.hpp"
#include "denseleaf/harness.hpp"
#include "denseleaf/kde.hpp"
#include "denseleaf/kernels.hpp"
#include "denseleaf/network.hpp"
#include "denseleaf/quadrature.hpp"
#include "denseleaf/rng.hpp"
#include "denseleaf/theorycheck.hpp"
#include "denseleaf/twostage.hpp"
