#pragma once

#include "meg/core.hpp"
#include "meg/edge_markov.hpp"
#include "meg/expansion.hpp"
#include "meg/flooding.hpp"
#include "meg/geometric.hpp"
#include "meg/harness.hpp"
#include "meg/rng.hpp"
#include "meg/stats.hpp"
