#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fraclab/detail/numeric.hpp"
#include "fraclab/errors.hpp"

namespace fraclab {

// K(alpha) = (a+b) sinc((a+b) alpha) sinc(w alpha)^h with w = (b-a)/h. Its transform
// is the box of half-width (a+b)/2 smoothed by h uniform densities of width w.
struct FreemanKernel {
    double a;
    double b;
    int h;

    FreemanKernel(double a_, double b_, int h_ = 2) : a(a_), b(b_), h(h_) {
        require(std::isfinite(a) && std::isfinite(b) && a > 0 && b > a, "kernel needs 0 < a < b");
        require(h >= 1, "kernel order h must be >= 1");
    }

    double width() const { return (b - a) / h; }

    // Constant C in the tail estimate |K(alpha)| <= C |alpha|^{-h-1}.
    double tail_constant() const {
        return std::pow(h / (std::numbers::pi * (b - a)), h) / std::numbers::pi;
    }
};

inline double freeman_eval(const FreemanKernel& K, double alpha) {
    return (K.a + K.b) * detail::sinc((K.a + K.b) * alpha) *
           std::pow(detail::sinc(K.width() * alpha), K.h);
}

// min{a+b, 1/(pi|alpha|), (h/pi)^h (b-a)^{-h} |alpha|^{-h-1}}
inline double freeman_decay_bound(const FreemanKernel& K, double alpha) {
    double x = std::fabs(alpha);
    double v = K.a + K.b;
    if (x == 0) return v;
    v = std::min(v, 1.0 / (std::numbers::pi * x));
    v = std::min(v, std::pow(K.h / std::numbers::pi, K.h) * std::pow(K.b - K.a, -K.h) *
                        std::pow(x, -K.h - 1));
    return v;
}

// Integral of min{1/(pi x), C x^{-h-1}} over [A, inf); an upper bound for the
// one-sided tail of |K|.
inline double freeman_tail_integral(const FreemanKernel& K, double A) {
    require(A > 0, "tail start must be positive");
    double C = K.tail_constant();
    double cross = std::pow(std::numbers::pi * C, 1.0 / K.h);
    if (A >= cross) return C * std::pow(A, -K.h) / K.h;
    return std::log(cross / A) / std::numbers::pi + C * std::pow(cross, -K.h) / K.h;
}

// Smallest A (up to rounding) with freeman_tail_integral(K, A) <= target.
inline double freeman_tail_cutoff(const FreemanKernel& K, double target) {
    require(target > 0, "tail target must be positive");
    double C = K.tail_constant();
    double cross = std::pow(std::numbers::pi * C, 1.0 / K.h);
    double at_cross = C * std::pow(cross, -K.h) / K.h;
    if (target <= at_cross) return std::pow(C / (K.h * target), 1.0 / K.h);
    return cross * std::exp(-std::numbers::pi * (target - at_cross));
}

namespace detail {

inline double binomial(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// CDF of the sum of h independent uniforms on [0,1].
inline double irwin_hall_cdf(int h, double x) {
    if (x <= 0) return 0.0;
    if (x >= h) return 1.0;
    if (x > 0.5 * h) return 1.0 - irwin_hall_cdf(h, h - x);
    double fact = 1;
    for (int i = 2; i <= h; ++i) fact *= i;
    double acc = 0;
    int top = static_cast<int>(std::floor(x));
    for (int k = 0; k <= top; ++k) {
        double term = binomial(h, k) * std::pow(x - k, h);
        acc += (k % 2 ? -term : term);
    }
    return std::clamp(acc / fact, 0.0, 1.0);
}

}  // namespace detail

inline double freeman_psi(const FreemanKernel& K, double xi) {
    double x = std::fabs(xi);
    if (x <= K.a) return 1.0;
    if (x >= K.b) return 0.0;
    // psi = P(|xi - U| < c) with U a centred sum of h uniforms of width w.
    double w = K.width(), c = 0.5 * (K.a + K.b), half = 0.5 * K.h;
    auto cdf = [&](double u) { return detail::irwin_hall_cdf(K.h, u / w + half); };
    return std::clamp(cdf(x + c) - cdf(x - c), 0.0, 1.0);
}

inline double chi_tau(double xi, double tau) { return std::fabs(xi) < tau ? 1.0 : 0.0; }

inline double sinc_sq(double alpha) {
    double v = detail::sinc(alpha);
    return v * v;
}

inline double tent_hat(double eta, double x) {
    require(eta > 0, "eta must be positive");
    return std::max(0.0, 1.0 - std::fabs(x) / eta);
}

inline double w_eta(double eta, double alpha) {
    require(eta > 0, "eta must be positive");
    return eta * sinc_sq(eta * alpha);
}

inline double lambda_triangle(double u) { return std::max(0.0, 1.0 - std::fabs(u)); }

struct KernelPair {
    FreemanKernel minus;
    FreemanKernel plus;
    double tau;
    double tau_tilde;
};

inline KernelPair make_kernel_pair(double tau, double P, int h = 2) {
    require(tau > 0, "tau must be positive");
    require(P > 1, "kernel pair needs P > 1");
    double tt = tau / std::log(P);
    require(tt < tau, "tau_tilde must be smaller than tau (needs P > e)");
    return {FreemanKernel(tau - tt, tau, h), FreemanKernel(tau, tau + tt, h), tau, tt};
}

}  // namespace fraclab
