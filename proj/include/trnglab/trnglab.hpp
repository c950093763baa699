#pragma once

#include "analysis.hpp"
#include "config.hpp"
#include "extract.hpp"
#include "increment_pmf.hpp"
#include "markov_attack.hpp"
#include "pipeline.hpp"
#include "ro_sim.hpp"
#include "rng.hpp"
#include "special_functions.hpp"
#include "stat_tests.hpp"
