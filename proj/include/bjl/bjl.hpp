#pragma once

#include "bjl/coordinates.hpp"
#include "bjl/dynamics.hpp"
#include "bjl/errors.hpp"
#include "bjl/experiments/appendix.hpp"
#include "bjl/experiments/density_vs_sim.hpp"
#include "bjl/experiments/hitting.hpp"
#include "bjl/experiments/identities.hpp"
#include "bjl/experiments/suites.hpp"
#include "bjl/io.hpp"
#include "bjl/orthopoly.hpp"
#include "bjl/parallel.hpp"
#include "bjl/quadrature.hpp"
#include "bjl/rng.hpp"
#include "bjl/roots.hpp"
#include "bjl/semigroup.hpp"
#include "bjl/version.hpp"
