#pragma once

#include "opdyn/arbitration.hpp"
#include "opdyn/coalescence.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/error.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/report.hpp"
#include "opdyn/scores.hpp"
#include "opdyn/sweep.hpp"
#include "opdyn/theory.hpp"
