#pragma once

#include "kaczmarz/clustering.hpp"
#include "kaczmarz/config.hpp"
#include "kaczmarz/dense.hpp"
#include "kaczmarz/error.hpp"
#include "kaczmarz/experiments.hpp"
#include "kaczmarz/feasibility.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/metrics.hpp"
#include "kaczmarz/random.hpp"
#include "kaczmarz/report.hpp"
#include "kaczmarz/sampling.hpp"
#include "kaczmarz/simplex.hpp"
#include "kaczmarz/solvers.hpp"
#include "kaczmarz/trace.hpp"
