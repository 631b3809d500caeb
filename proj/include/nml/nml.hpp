#pragma once

#include "nml/backend.hpp"
#include "nml/cluster.hpp"
#include "nml/conformance.hpp"
#include "nml/counters.hpp"
#include "nml/error.hpp"
#include "nml/kernels.hpp"
#include "nml/model.hpp"
#include "nml/parallel.hpp"
#include "nml/perf.hpp"
#include "nml/report.hpp"
#include "nml/run.hpp"
#include "nml/serialize.hpp"
#include "nml/softfloat.hpp"
