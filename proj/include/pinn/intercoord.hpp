#pragma once

#include "pinn/intercoord/channel.hpp"
#include "pinn/intercoord/dataset.hpp"
#include "pinn/intercoord/model.hpp"
#include "pinn/intercoord/wmmse.hpp"
