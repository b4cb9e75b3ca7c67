#pragma once

#include "batplace/assumptions.hpp"
#include "batplace/bench.hpp"
#include "batplace/case_file.hpp"
#include "batplace/error.hpp"
#include "batplace/fastpath.hpp"
#include "batplace/grid.hpp"
#include "batplace/ieee_feeders.hpp"
#include "batplace/oracle.hpp"
#include "batplace/placement.hpp"
#include "batplace/schedule.hpp"
#include "batplace/simplex.hpp"
#include "batplace/topology.hpp"
