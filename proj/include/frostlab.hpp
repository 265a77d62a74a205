#pragma once

#include "frostlab/core.hpp"
#include "frostlab/linalg.hpp"
#include "frostlab/grid.hpp"
#include "frostlab/generators.hpp"
#include "frostlab/measure.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/projection.hpp"
#include "frostlab/incidence.hpp"
#include "frostlab/furstenberg.hpp"
#include "frostlab/sumproduct.hpp"
#include "frostlab/experiment.hpp"
