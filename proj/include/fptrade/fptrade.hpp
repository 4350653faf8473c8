#pragma once

#include "fptrade/error.hpp"
#include "fptrade/date.hpp"
#include "fptrade/universe.hpp"
#include "fptrade/indicators.hpp"
#include "fptrade/rolling.hpp"
#include "fptrade/market_data.hpp"
#include "fptrade/pairgame.hpp"
#include "fptrade/sweep.hpp"
#include "fptrade/report.hpp"
