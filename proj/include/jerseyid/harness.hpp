#pragma once

#include "jerseyid/harness/config.hpp"
#include "jerseyid/harness/evaluate.hpp"
#include "jerseyid/harness/experiments.hpp"
#include "jerseyid/harness/metrics.hpp"
#include "jerseyid/harness/train.hpp"
