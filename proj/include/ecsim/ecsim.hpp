#pragma once

#include "ecsim/cli.hpp"
#include "ecsim/control.hpp"
#include "ecsim/dynamics.hpp"
#include "ecsim/error.hpp"
#include "ecsim/ledger.hpp"
#include "ecsim/risk.hpp"
#include "ecsim/valuation.hpp"
