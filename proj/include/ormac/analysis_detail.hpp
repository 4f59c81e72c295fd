#pragma once

#include <cmath>
#include <cstdint>

namespace ormac::detail {

inline constexpr double kLn2 = 0.6931471805599453094;

// log2 of the binomial coefficient via lgamma.
inline double log2_choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return -1.0 / 0.0;
    return (std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
            std::lgamma(static_cast<double>(n - k) + 1.0)) /
           kLn2;
}

}  // namespace ormac::detail
