#pragma once

// Umbrella header for the polarization eye-tracking toolkit.

#include "pet/calibration.hpp"
#include "pet/dataset.hpp"
#include "pet/demosaic.hpp"
#include "pet/error.hpp"
#include "pet/feature_match.hpp"
#include "pet/gaze_metrics.hpp"
#include "pet/image.hpp"
#include "pet/model_input.hpp"
#include "pet/mosaic.hpp"
#include "pet/png_io.hpp"
#include "pet/stats.hpp"
#include "pet/stokes.hpp"
#include "pet/svg_plot.hpp"
#include "pet/synth.hpp"
