#pragma once

#include "se23ctl/controller.hpp"
#include "se23ctl/dynamics.hpp"
#include "se23ctl/errors.hpp"
#include "se23ctl/gains.hpp"
#include "se23ctl/log_error.hpp"
#include "se23ctl/log_io.hpp"
#include "se23ctl/scenario.hpp"
#include "se23ctl/se23.hpp"
#include "se23ctl/simulation.hpp"
#include "se23ctl/so3.hpp"
#include "se23ctl/stability.hpp"
