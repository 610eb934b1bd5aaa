#pragma once

#include "heatlab/quadrature.hpp"
#include "heatlab/nonlinearity.hpp"
#include "heatlab/radial_field.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/criteria.hpp"
#include "heatlab/mild_solver.hpp"
