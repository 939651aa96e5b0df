#pragma once

#include "itreg/activators.hpp"
#include "itreg/baselines.hpp"
#include "itreg/bounds.hpp"
#include "itreg/core.hpp"
#include "itreg/csv.hpp"
#include "itreg/experiments.hpp"
#include "itreg/imaging.hpp"
#include "itreg/instances.hpp"
#include "itreg/linops.hpp"
#include "itreg/pgm.hpp"
#include "itreg/problem.hpp"
#include "itreg/prox.hpp"
#include "itreg/rng.hpp"
#include "itreg/solvers.hpp"
