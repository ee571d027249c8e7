#pragma once

#include "triflow/core.hpp"
#include "triflow/diagnostics.hpp"
#include "triflow/integrator.hpp"
#include "triflow/io.hpp"
#include "triflow/operators.hpp"
#include "triflow/problems.hpp"
#include "triflow/runner.hpp"
#include "triflow/schedules.hpp"
#include "triflow/validation.hpp"
