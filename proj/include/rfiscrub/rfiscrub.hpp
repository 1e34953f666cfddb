#pragma once

// Umbrella header for the full toolkit.

#include "rfiscrub/core.hpp"
#include "rfiscrub/phase.hpp"
#include "rfiscrub/fft.hpp"
#include "rfiscrub/dictionary.hpp"
#include "rfiscrub/solver.hpp"
#include "rfiscrub/estimator.hpp"
#include "rfiscrub/suppressor.hpp"
#include "rfiscrub/simulator.hpp"
#include "rfiscrub/baselines.hpp"
#include "rfiscrub/metrics.hpp"
#include "rfiscrub/image_io.hpp"
#include "rfiscrub/config.hpp"
