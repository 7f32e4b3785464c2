#pragma once

#include "checks.hpp"
#include "curve.hpp"
#include "isomono.hpp"
#include "monodromy.hpp"
#include "ode.hpp"
#include "rng.hpp"
#include "tau.hpp"
#include "theta.hpp"
#include "weierstrass.hpp"
