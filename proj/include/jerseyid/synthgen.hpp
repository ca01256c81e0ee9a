#pragma once

#include "jerseyid/synthgen/clock.hpp"
#include "jerseyid/synthgen/dataset.hpp"
#include "jerseyid/synthgen/font.hpp"
#include "jerseyid/synthgen/io.hpp"
#include "jerseyid/synthgen/shiftdb.hpp"
#include "jerseyid/synthgen/tracklet.hpp"
#include "jerseyid/synthgen/types.hpp"
