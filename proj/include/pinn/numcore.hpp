#pragma once

#include "pinn/numcore/activation.hpp"
#include "pinn/numcore/batch_norm.hpp"
#include "pinn/numcore/binder.hpp"
#include "pinn/numcore/gradcheck.hpp"
#include "pinn/numcore/kernels.hpp"
#include "pinn/numcore/ops.hpp"
#include "pinn/numcore/optim.hpp"
#include "pinn/numcore/tape.hpp"
#include "pinn/numcore/tensor.hpp"
