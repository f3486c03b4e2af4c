#pragma once

#include "pinn/pra/config.hpp"
#include "pinn/pra/edf.hpp"
#include "pinn/pra/lp.hpp"
#include "pinn/pra/plan.hpp"
#include "pinn/pra/scenario.hpp"
#include "pinn/pra/train.hpp"
