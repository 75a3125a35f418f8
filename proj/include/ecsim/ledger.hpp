#pragma once

#include "ecsim/ledger/events.hpp"
#include "ecsim/ledger/money.hpp"
#include "ecsim/ledger/new_energy.hpp"
#include "ecsim/ledger/scenario.hpp"
#include "ecsim/ledger/scenario_io.hpp"
#include "ecsim/ledger/world.hpp"
