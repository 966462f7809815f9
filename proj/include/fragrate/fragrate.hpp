#pragma once

#include "transport_group.hpp"
#include "group_fourier.hpp"
#include "probability.hpp"
#include "kernels.hpp"
#include "direct_solver.hpp"
#include "inverse_solver.hpp"
#include "experiment.hpp"
#include "config.hpp"
#include "commands.hpp"
#include "selftest.hpp"
