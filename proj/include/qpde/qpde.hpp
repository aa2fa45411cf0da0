#pragma once

#include "qpde/circuit_optimizer.hpp"
#include "qpde/engine.hpp"
#include "qpde/evolution.hpp"
#include "qpde/gaussian_fit.hpp"
#include "qpde/linalg.hpp"
#include "qpde/run_config.hpp"
#include "qpde/sampling.hpp"
#include "qpde/spin_model.hpp"
#include "qpde/statevector.hpp"
