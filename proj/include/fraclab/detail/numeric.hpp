#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace fraclab::detail {

using cplx = std::complex<double>;

// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x) {
    double n = std::nearbyint(x);
    double r = x - n;
    double v = std::sin(std::numbers::pi * r);
    return std::fmod(std::fabs(n), 2.0) == 1.0 ? -v : v;
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    return sin_pi(x) / (std::numbers::pi * x);
}

// e(x) = exp(2 pi i x), with the phase reduced to [-1/2, 1/2] first.
inline cplx unit(double x) {
    double r = x - std::nearbyint(x);
    double a = 2.0 * std::numbers::pi * r;
    return {std::cos(a), std::sin(a)};
}

// x^theta as exp(theta ln x); every module uses this so counts agree bit for bit.
inline double power(double x, double theta) {
    return std::exp(theta * std::log(x));
}

inline std::int64_t floor_int(double P) {
    return static_cast<std::int64_t>(std::floor(P));
}

}  // namespace fraclab::detail
