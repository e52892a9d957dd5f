#pragma once

#include "mprim/regressor/adam.hpp"
#include "mprim/regressor/loss.hpp"
#include "mprim/regressor/mlp.hpp"
#include "mprim/regressor/ridge.hpp"
