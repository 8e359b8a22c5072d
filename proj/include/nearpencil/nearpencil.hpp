#pragma once

#include "nearpencil/cli.hpp"
#include "nearpencil/distance.hpp"
#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"
#include "nearpencil/objective.hpp"
#include "nearpencil/optimize.hpp"
#include "nearpencil/oracle.hpp"
#include "nearpencil/pencil.hpp"
#include "nearpencil/pseudospectra.hpp"
