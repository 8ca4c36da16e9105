#pragma once

// Everything except the JSON layer (json_io.hpp), which needs nlohmann/json.

#include "bindlab/errors.hpp"
#include "bindlab/random.hpp"
#include "bindlab/task.hpp"
#include "bindlab/catalog.hpp"
#include "bindlab/render.hpp"
#include "bindlab/filler.hpp"
#include "bindlab/counterfactual.hpp"
#include "bindlab/mechanisms.hpp"
#include "bindlab/mixture.hpp"
#include "bindlab/metrics.hpp"
#include "bindlab/dataset.hpp"
#include "bindlab/fit.hpp"
#include "bindlab/evaluation.hpp"
#include "bindlab/analysis.hpp"
