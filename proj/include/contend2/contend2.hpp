#pragma once

#include "contend2/analytic.hpp"
#include "contend2/board_io.hpp"
#include "contend2/core.hpp"
#include "contend2/error.hpp"
#include "contend2/optimizer.hpp"
#include "contend2/policy_io.hpp"
#include "contend2/protocols.hpp"
#include "contend2/roots.hpp"
#include "contend2/simulator.hpp"
