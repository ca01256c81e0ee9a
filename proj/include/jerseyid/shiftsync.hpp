#pragma once

#include "jerseyid/shiftsync/clock_reader.hpp"
#include "jerseyid/shiftsync/inference.hpp"
#include "jerseyid/shiftsync/masking.hpp"
