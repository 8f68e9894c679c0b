#pragma once

#include "onnsim/config.hpp"
#include "onnsim/coupling.hpp"
#include "onnsim/csv.hpp"
#include "onnsim/device.hpp"
#include "onnsim/engine.hpp"
#include "onnsim/errors.hpp"
#include "onnsim/experiments.hpp"
#include "onnsim/netlist.hpp"
#include "onnsim/oscillator.hpp"
#include "onnsim/phase.hpp"
#include "onnsim/random.hpp"
#include "onnsim/rk4.hpp"
