#pragma once

#include "netinf/error.hpp"
#include "netinf/rng.hpp"
#include "netinf/parallel.hpp"
#include "netinf/graph.hpp"
#include "netinf/transmission.hpp"
#include "netinf/cascade.hpp"
#include "netinf/likelihood.hpp"
#include "netinf/solver.hpp"
#include "netinf/diagnostics.hpp"
#include "netinf/evaluation.hpp"
