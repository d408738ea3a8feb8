#pragma once

#include "baselines.hpp"
#include "error.hpp"
#include "evalmetrics.hpp"
#include "flow.hpp"
#include "graph.hpp"
#include "mapeq.hpp"
#include "parallel.hpp"
#include "partition.hpp"
#include "partitioning.hpp"
#include "spreading.hpp"
