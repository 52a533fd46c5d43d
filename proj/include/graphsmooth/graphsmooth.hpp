#pragma once

#include "graphsmooth/bounds.hpp"
#include "graphsmooth/dense.hpp"
#include "graphsmooth/experiment.hpp"
#include "graphsmooth/graph.hpp"
#include "graphsmooth/measurement.hpp"
#include "graphsmooth/rng.hpp"
#include "graphsmooth/signal_gen.hpp"
#include "graphsmooth/solver.hpp"
#include "graphsmooth/stacked_signal.hpp"
#include "graphsmooth/verify.hpp"
#include "graphsmooth/version.hpp"
