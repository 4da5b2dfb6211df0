#pragma once

#include "edrsim/circuit.hpp"
#include "edrsim/counts.hpp"
#include "edrsim/edr.hpp"
#include "edrsim/errors.hpp"
#include "edrsim/optics.hpp"
#include "edrsim/qcore.hpp"
#include "edrsim/sweep.hpp"
