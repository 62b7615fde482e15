#pragma once

#include "strnn/numerics.hpp"
#include "strnn/spatial_graph.hpp"
#include "strnn/electrode_layout.hpp"
#include "strnn/volume.hpp"
#include "strnn/srnn.hpp"
#include "strnn/trnn.hpp"
#include "strnn/loss.hpp"
#include "strnn/model.hpp"
#include "strnn/parallel.hpp"
#include "strnn/training.hpp"
#include "strnn/features.hpp"
#include "strnn/stv_io.hpp"
#include "strnn/run_config.hpp"
#include "strnn/checkpoint.hpp"
#include "strnn/synthetic.hpp"
