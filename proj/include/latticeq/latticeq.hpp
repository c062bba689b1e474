#pragma once

#include "latticeq/error.hpp"
#include "latticeq/lattice.hpp"
#include "latticeq/potential.hpp"
#include "latticeq/hamiltonian.hpp"
#include "latticeq/weight.hpp"
#include "latticeq/numerics/chebyshev.hpp"
#include "latticeq/numerics/dense.hpp"
#include "latticeq/numerics/green.hpp"
#include "latticeq/numerics/quadrature.hpp"
#include "latticeq/eigenfunctions.hpp"
#include "latticeq/transport.hpp"
#include "latticeq/analysis.hpp"
