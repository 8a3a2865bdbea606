#pragma once

// Umbrella header for the adaptive Brinkman–Darcy–Forchheimer solver.

#include "bdfem/adaptivity.hpp"
#include "bdfem/assembly.hpp"
#include "bdfem/config.hpp"
#include "bdfem/errors.hpp"
#include "bdfem/estimator.hpp"
#include "bdfem/experiments.hpp"
#include "bdfem/geometry.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/quadrature.hpp"
#include "bdfem/solver.hpp"
#include "bdfem/spaces.hpp"
#include "bdfem/vtk.hpp"
#include "bdfem/weights.hpp"
