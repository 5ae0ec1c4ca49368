#pragma once

#include "pfs/characteristics.hpp"
#include "pfs/classify.hpp"
#include "pfs/clustering.hpp"
#include "pfs/dataio.hpp"
#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/perturbation.hpp"
#include "pfs/pipeline.hpp"
#include "pfs/random.hpp"
#include "pfs/report.hpp"
