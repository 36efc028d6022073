#pragma once

#include "anacp/analytic.hpp"
#include "anacp/checkpoint.hpp"
#include "anacp/classifier.hpp"
#include "anacp/cp_layer.hpp"
#include "anacp/error.hpp"
#include "anacp/feature_store.hpp"
#include "anacp/learner.hpp"
#include "anacp/repulsion.hpp"
#include "anacp/report.hpp"
#include "anacp/rng.hpp"
#include "anacp/stats.hpp"
#include "anacp/types.hpp"
