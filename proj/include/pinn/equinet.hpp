#pragma once

#include "pinn/equinet/beta.hpp"
#include "pinn/equinet/fc.hpp"
#include "pinn/equinet/init.hpp"
#include "pinn/equinet/permutation.hpp"
#include "pinn/equinet/pinn1d.hpp"
#include "pinn/equinet/pinn2d.hpp"
#include "pinn/equinet/reference.hpp"
