#pragma once

#include "stswe/adapt.hpp"
#include "stswe/basis.hpp"
#include "stswe/benchmarks.hpp"
#include "stswe/fespace.hpp"
#include "stswe/forms.hpp"
#include "stswe/io.hpp"
#include "stswe/mesh.hpp"
#include "stswe/norms.hpp"
#include "stswe/problem.hpp"
#include "stswe/quadrature.hpp"
#include "stswe/slices.hpp"
#include "stswe/solver.hpp"
