// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.
#pragma once

#include "sticky_dbm/acceptance.hpp"
#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/config.hpp"
#include "sticky_dbm/dirichlet_form.hpp"
#include "sticky_dbm/error.hpp"
#include "sticky_dbm/experiment.hpp"
#include "sticky_dbm/geometry.hpp"
#include "sticky_dbm/measure.hpp"
#include "sticky_dbm/parallel.hpp"
#include "sticky_dbm/quadrature.hpp"
#include "sticky_dbm/report.hpp"
#include "sticky_dbm/rng.hpp"
#include "sticky_dbm/samplers.hpp"
#include "sticky_dbm/statistics.hpp"
#include "sticky_dbm/test_function.hpp"
