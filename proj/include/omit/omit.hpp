#pragma once

#include "omit/config.hpp"
#include "omit/cubic.hpp"
#include "omit/dynamics.hpp"
#include "omit/error.hpp"
#include "omit/io.hpp"
#include "omit/params.hpp"
#include "omit/plot.hpp"
#include "omit/response.hpp"
#include "omit/run.hpp"
#include "omit/steady_state.hpp"
#include "omit/units.hpp"
