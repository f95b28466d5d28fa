#pragma once

#include "mssr/analysis.hpp"
#include "mssr/bounds.hpp"
#include "mssr/dataio.hpp"
#include "mssr/distribution.hpp"
#include "mssr/error.hpp"
#include "mssr/experiments.hpp"
#include "mssr/market.hpp"
#include "mssr/policies.hpp"
