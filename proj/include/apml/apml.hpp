#pragma once

#include "apml/adaptive_softmax.hpp"
#include "apml/assignment.hpp"
#include "apml/bench.hpp"
#include "apml/cost_matrix.hpp"
#include "apml/error.hpp"
#include "apml/fit.hpp"
#include "apml/io.hpp"
#include "apml/loss.hpp"
#include "apml/metrics.hpp"
#include "apml/point_set.hpp"
#include "apml/shapes.hpp"
#include "apml/sinkhorn.hpp"
#include "apml/transport_analysis.hpp"
