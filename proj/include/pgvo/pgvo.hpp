#pragma once

#include "pgvo/action.hpp"
#include "pgvo/camera.hpp"
#include "pgvo/config.hpp"
#include "pgvo/correspondences.hpp"
#include "pgvo/dataset.hpp"
#include "pgvo/depth.hpp"
#include "pgvo/depth_io.hpp"
#include "pgvo/episode.hpp"
#include "pgvo/error.hpp"
#include "pgvo/grid.hpp"
#include "pgvo/io.hpp"
#include "pgvo/losses.hpp"
#include "pgvo/metrics.hpp"
#include "pgvo/parallel.hpp"
#include "pgvo/planner.hpp"
#include "pgvo/random.hpp"
#include "pgvo/se2.hpp"
#include "pgvo/sim.hpp"
#include "pgvo/trainer.hpp"
#include "pgvo/vo_classical.hpp"
