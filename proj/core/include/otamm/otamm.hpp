#pragma once

#include "otamm/analysis.hpp"
#include "otamm/bench.hpp"
#include "otamm/errors.hpp"
#include "otamm/io.hpp"
#include "otamm/linear_engine.hpp"
#include "otamm/macromodel.hpp"
#include "otamm/transient.hpp"
#include "otamm/units.hpp"
#include "otamm/variability.hpp"
