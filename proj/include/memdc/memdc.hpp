#pragma once

#include "memdc/amplifier.hpp"
#include "memdc/calibration.hpp"
#include "memdc/circuit.hpp"
#include "memdc/config.hpp"
#include "memdc/device.hpp"
#include "memdc/error.hpp"
#include "memdc/experiments.hpp"
#include "memdc/programming.hpp"
#include "memdc/records.hpp"
#include "memdc/rng.hpp"
#include "memdc/runner.hpp"
#include "memdc/scaling.hpp"
#include "memdc/stats.hpp"
