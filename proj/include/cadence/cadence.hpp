#pragma once

#include "cadence/clustering.hpp"
#include "cadence/corcondia.hpp"
#include "cadence/csv.hpp"
#include "cadence/demographics.hpp"
#include "cadence/factor_model.hpp"
#include "cadence/ingest.hpp"
#include "cadence/io.hpp"
#include "cadence/linalg.hpp"
#include "cadence/nnls.hpp"
#include "cadence/parafac.hpp"
#include "cadence/parallel.hpp"
#include "cadence/pipeline.hpp"
#include "cadence/special_functions.hpp"
#include "cadence/stats.hpp"
#include "cadence/synthetic.hpp"
#include "cadence/tensor.hpp"
