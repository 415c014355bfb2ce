#pragma once

#include "lqcertify/audit.hpp"
#include "lqcertify/bounds.hpp"
#include "lqcertify/core.hpp"
#include "lqcertify/harness.hpp"
#include "lqcertify/io.hpp"
#include "lqcertify/properties.hpp"
#include "lqcertify/rng.hpp"
#include "lqcertify/solvers.hpp"
