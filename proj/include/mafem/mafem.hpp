#pragma once

#include "mafem/geometry.hpp"
#include "mafem/quadrature.hpp"
#include "mafem/mesh.hpp"
#include "mafem/field.hpp"
#include "mafem/fespace.hpp"
#include "mafem/assembly.hpp"
#include "mafem/regularize.hpp"
#include "mafem/convexity.hpp"
#include "mafem/solver.hpp"
#include "mafem/ma_measure.hpp"
#include "mafem/problems.hpp"
#include "mafem/harness.hpp"
