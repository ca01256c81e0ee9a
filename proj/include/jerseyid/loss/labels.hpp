#pragma once

// Ground-truth encoding for the three heads. The holistic head indexes the
// class space (null = 0). Each digit head has 11 states: 0-9 plus 10 for
// "no digit here", which covers null labels and the missing second digit of
// single-digit numbers.

#include <cstddef>
#include <stdexcept>

#include "jerseyid/common.hpp"
#include "jerseyid/numkit/tensor.hpp"

namespace jerseyid::loss {

inline constexpr std::size_t kDigitClasses = 11;
inline constexpr std::size_t kDigitAbsent = 10;

struct LabelTriple {
  std::size_t holistic = ClassSpace::kNullIndex;  // y0
  std::size_t first_digit = kDigitAbsent;         // y1
  std::size_t second_digit = kDigitAbsent;        // y2

  friend bool operator==(const LabelTriple&, const LabelTriple&) = default;
};

/// Single-digit numbers use the first digit slot and leave the second absent.
inline LabelTriple encode_labels(const Jersey& jersey, const ClassSpace& classes) {
  LabelTriple y;
  y.holistic = classes.index_of(jersey);  // throws for out-of-roster jerseys
  if (!jersey) return y;
  const int n = *jersey;
  if (n < 0 || n > 99) throw std::out_of_range("jersey " + std::to_string(n) + " has > 2 digits");
  if (n >= 10) {
    y.first_digit = static_cast<std::size_t>(n / 10);
    y.second_digit = static_cast<std::size_t>(n % 10);
  } else {
    y.first_digit = static_cast<std::size_t>(n);
  }
  return y;
}

inline Jersey decode_labels(const LabelTriple& y, const ClassSpace& classes) {
  return classes.jersey_at(y.holistic);
}

/// Learned task weights, sigma_i = exp(s_i). All three are scalars.
struct LossWeights {
  numkit::DiffTensor s1;
  numkit::DiffTensor s2;
  numkit::DiffTensor s3;

  static LossWeights init(double s = 0.0, bool requires_grad = true) {
    return {numkit::DiffTensor::scalar(s, requires_grad), numkit::DiffTensor::scalar(s, requires_grad),
            numkit::DiffTensor::scalar(s, requires_grad)};
  }
};

}  // namespace jerseyid::loss
