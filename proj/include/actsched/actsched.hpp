#pragma once

#include "actsched/csv.hpp"
#include "actsched/doubling.hpp"
#include "actsched/error.hpp"
#include "actsched/experiment.hpp"
#include "actsched/fractional.hpp"
#include "actsched/instance.hpp"
#include "actsched/instance_io.hpp"
#include "actsched/invariants.hpp"
#include "actsched/oracle.hpp"
#include "actsched/random.hpp"
#include "actsched/rounding.hpp"
