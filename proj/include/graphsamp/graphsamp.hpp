#pragma once

#include "graphsamp/error.hpp"
#include "graphsamp/core.hpp"
#include "graphsamp/rng.hpp"
#include "graphsamp/synthdata.hpp"
#include "graphsamp/graphlearn.hpp"
#include "graphsamp/sampler.hpp"
#include "graphsamp/reconstruct.hpp"
#include "graphsamp/bench.hpp"
#include "graphsamp/io.hpp"
