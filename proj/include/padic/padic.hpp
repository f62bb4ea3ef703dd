#pragma once

#include "padic/ah_integration.hpp"
#include "padic/counterexample.hpp"
#include "padic/grid.hpp"
#include "padic/io.hpp"
#include "padic/parallel.hpp"
#include "padic/rational.hpp"
#include "padic/recovery.hpp"
#include "padic/series.hpp"
#include "padic/step_function.hpp"
#include "padic/systems.hpp"
#include "padic/unit_value.hpp"
