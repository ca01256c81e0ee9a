#pragma once

#include "jerseyid/numkit/adam.hpp"
#include "jerseyid/numkit/gemm.hpp"
#include "jerseyid/numkit/ops.hpp"
#include "jerseyid/numkit/tensor.hpp"
