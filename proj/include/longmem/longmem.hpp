#pragma once

#include "longmem/baselines.hpp"
#include "longmem/distributions.hpp"
#include "longmem/error.hpp"
#include "longmem/estimators.hpp"
#include "longmem/harness.hpp"
#include "longmem/processes.hpp"
#include "longmem/random.hpp"
