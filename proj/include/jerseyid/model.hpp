#pragma once

#include "jerseyid/model/checkpoint.hpp"
#include "jerseyid/model/config.hpp"
#include "jerseyid/model/network.hpp"
#include "jerseyid/model/params.hpp"
