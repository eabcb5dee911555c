#pragma once

#include "analytic.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "lindblad.hpp"
#include "params.hpp"
#include "special.hpp"
#include "spectra.hpp"
#include "svg.hpp"
#include "sweeps.hpp"
