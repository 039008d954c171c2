#pragma once

// Everything: domains, operators, time stepping, Galerkin, diagnostics,
// configuration and the command layer.

#include "benney/banded.hpp"
#include "benney/cli.hpp"
#include "benney/config.hpp"
#include "benney/diagnostics.hpp"
#include "benney/domain.hpp"
#include "benney/energy.hpp"
#include "benney/galerkin.hpp"
#include "benney/io.hpp"
#include "benney/operators.hpp"
#include "benney/sampling.hpp"
#include "benney/stepper.hpp"
