#pragma once

// Event-camera trajectory estimation by contrast maximization in a
// volumetric ray density field, with an Ackermann front end, a planar
// B-spline back end, semi-dense depth recovery, and a synthetic event
// generator for ground-truth validation.

#include "vwe/common.hpp"
#include "vwe/config.hpp"
#include "vwe/core/camera.hpp"
#include "vwe/core/event.hpp"
#include "vwe/core/io.hpp"
#include "vwe/core/ray.hpp"
#include "vwe/core/transform.hpp"
#include "vwe/field/accumulate.hpp"
#include "vwe/field/iwe.hpp"
#include "vwe/field/voxel_grid.hpp"
#include "vwe/objective/contrast.hpp"
#include "vwe/objective/optimizer.hpp"
#include "vwe/objective/variance.hpp"
#include "vwe/pipeline/backend.hpp"
#include "vwe/pipeline/depth_map.hpp"
#include "vwe/pipeline/frontend.hpp"
#include "vwe/pipeline/metrics.hpp"
#include "vwe/synth/generate.hpp"
#include "vwe/synth/scene.hpp"
#include "vwe/synth/suites.hpp"
#include "vwe/trajectory/ackermann.hpp"
#include "vwe/trajectory/bspline.hpp"
#include "vwe/trajectory/model.hpp"
#include "vwe/trajectory/spline_fit.hpp"
