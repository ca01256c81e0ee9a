#pragma once

#include "jerseyid/loss/labels.hpp"
#include "jerseyid/loss/multitask.hpp"
