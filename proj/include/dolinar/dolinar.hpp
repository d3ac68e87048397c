#pragma once

#include "dolinar/errors.hpp"
#include "dolinar/fock.hpp"
#include "dolinar/quadrature.hpp"
#include "dolinar/kraus.hpp"
#include "dolinar/coherent.hpp"
#include "dolinar/qubit.hpp"
#include "dolinar/nogo.hpp"
#include "dolinar/trajectory.hpp"
#include "dolinar/run_config.hpp"
#include "dolinar/commands.hpp"
