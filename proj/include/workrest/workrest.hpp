#pragma once

#include "workrest/delegation.hpp"
#include "workrest/experiments.hpp"
#include "workrest/policy.hpp"
#include "workrest/population.hpp"
#include "workrest/random.hpp"
#include "workrest/simulation.hpp"
#include "workrest/worker.hpp"
