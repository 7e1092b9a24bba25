#ifndef RELD_RELD_HPP
#define RELD_RELD_HPP

#include "reld/csv.hpp"
#include "reld/discrepancy.hpp"
#include "reld/experiment.hpp"
#include "reld/forecaster.hpp"
#include "reld/losses.hpp"
#include "reld/series.hpp"
#include "reld/synth.hpp"
#include "reld/weighting.hpp"

#endif
