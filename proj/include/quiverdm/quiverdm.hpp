#pragma once
/// @file quiverdm.hpp
/// @brief Umbrella header: matrix kernels (strip logarithm, psi calculus),
///        multivalued expression algebra, hypercube representations with
///        validation and generation, the exponential/logarithm/duality
///        functors, solution-family verification up to the main equivalence
///        certificate, and the interchange format with its CLI front end.

#include <quiverdm/cmat.hpp>
#include <quiverdm/rng.hpp>
#include <quiverdm/matrix_functions.hpp>
#include <quiverdm/logexpr.hpp>
#include <quiverdm/quiver.hpp>
#include <quiverdm/functors.hpp>
#include <quiverdm/solutions.hpp>
#include <quiverdm/serialization.hpp>
#include <quiverdm/cli.hpp>
