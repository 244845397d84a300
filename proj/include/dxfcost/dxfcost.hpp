#pragma once

// Umbrella header for the whole library.

#include "dxfcost/common.hpp"
#include "dxfcost/csv.hpp"
#include "dxfcost/dxf.hpp"
#include "dxfcost/evaluate.hpp"
#include "dxfcost/explain.hpp"
#include "dxfcost/features.hpp"
#include "dxfcost/gbdt.hpp"
#include "dxfcost/group_reference.hpp"
#include "dxfcost/metrics.hpp"
#include "dxfcost/pipeline.hpp"
#include "dxfcost/quantities.hpp"
#include "dxfcost/rng.hpp"
#include "dxfcost/split.hpp"
#include "dxfcost/stats.hpp"
#include "dxfcost/synth.hpp"
#include "dxfcost/table.hpp"
