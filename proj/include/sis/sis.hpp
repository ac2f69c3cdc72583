#pragma once

#include "sis/errors.hpp"
#include "sis/rng.hpp"
#include "sis/graph.hpp"
#include "sis/graph_descriptor.hpp"
#include "sis/params.hpp"
#include "sis/bounds.hpp"
#include "sis/spectral.hpp"
#include "sis/chain.hpp"
#include "sis/montecarlo.hpp"
#include "sis/analysis.hpp"
#include "sis/io.hpp"
