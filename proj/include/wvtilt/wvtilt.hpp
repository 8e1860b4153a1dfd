#pragma once

#include "wvtilt/constants.hpp"
#include "wvtilt/detection.hpp"
#include "wvtilt/errors.hpp"
#include "wvtilt/hg_modes.hpp"
#include "wvtilt/io.hpp"
#include "wvtilt/lab_experiment.hpp"
#include "wvtilt/philox.hpp"
#include "wvtilt/quadrature.hpp"
#include "wvtilt/shot_noise_mc.hpp"
#include "wvtilt/weak_measurement.hpp"
#include "wvtilt/reproduce.hpp"
