#pragma once

#include "pinn/benchcli/checkpoint.hpp"
#include "pinn/benchcli/commands.hpp"
#include "pinn/benchcli/config.hpp"
#include "pinn/benchcli/gradcheck.hpp"
#include "pinn/benchcli/io.hpp"
