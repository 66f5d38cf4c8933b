#pragma once

// Umbrella header: floorplan model, raster analysis, whitespace scoring,
// direction-aware refinement, area recycling and the end-to-end flow.

#include "geometry.hpp"
#include "floorplan.hpp"
#include "raster.hpp"
#include "image_io.hpp"
#include "segmentation.hpp"
#include "scoring.hpp"
#include "refinement.hpp"
#include "recycling.hpp"
#include "pipeline.hpp"
