#pragma once

#include "jerseyid/weaklabel/augment.hpp"
#include "jerseyid/weaklabel/frame_scorer.hpp"
#include "jerseyid/weaklabel/labels.hpp"
#include "jerseyid/weaklabel/sampling.hpp"
