#pragma once

// Umbrella header for the whole toolkit.

#include "nfx/anfis.hpp"
#include "nfx/baselines.hpp"
#include "nfx/clonal.hpp"
#include "nfx/compare.hpp"
#include "nfx/csv.hpp"
#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/fcm.hpp"
#include "nfx/fcm_ga.hpp"
#include "nfx/linalg.hpp"
#include "nfx/membership.hpp"
#include "nfx/mlp.hpp"
#include "nfx/pipeline.hpp"
#include "nfx/pso.hpp"
#include "nfx/synth.hpp"
#include "nfx/timeseries.hpp"
#include "nfx/train.hpp"
