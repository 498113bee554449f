#pragma once

#include "curvature.hpp"
#include "dopri5.hpp"
#include "eigen.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "ivp.hpp"
#include "nonlinearity.hpp"
#include "parallel.hpp"
#include "polar.hpp"
#include "shooting.hpp"
#include "sweep.hpp"
