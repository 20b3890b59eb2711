#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include "fraclab/arcs.hpp"
#include "fraclab/detail/numeric.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

using cplx = std::complex<double>;

namespace detail {

inline cplx sum_range(double theta, double alpha, std::int64_t lo, std::int64_t hi,
                      const cplx* weights = nullptr) {
    long double re = 0, im = 0;
    for (std::int64_t x = lo; x <= hi; ++x) {
        cplx z = unit(alpha * power(static_cast<double>(x), theta));
        if (weights) z *= weights[x - 1];
        re += z.real();
        im += z.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

}  // namespace detail

// f(alpha; P) = sum_{1 <= x <= P} e(alpha x^theta)
inline cplx f_sum(double theta, double alpha, double P) {
    require(P >= 1, "f_sum needs P >= 1");
    return detail::sum_range(theta, alpha, 1, detail::floor_int(P));
}

// g(alpha; P) = sum_{P < x <= 2P} e(alpha x^theta)
inline cplx g_sum(double theta, double alpha, double P) {
    require(P >= 1, "g_sum needs P >= 1");
    return detail::sum_range(theta, alpha, detail::floor_int(P) + 1, detail::floor_int(2 * P));
}

// weights[x-1] multiplies the term at x.
inline cplx weighted_sum(const std::vector<cplx>& weights, double theta, double alpha, double P) {
    require(P >= 1, "weighted_sum needs P >= 1");
    auto n = detail::floor_int(P);
    require(static_cast<std::int64_t>(weights.size()) >= n,
            "weight sequence shorter than floor(P)");
    return detail::sum_range(theta, alpha, 1, n, weights.data());
}

namespace detail {

// Below this value of |u| P^theta the integral is done by panels; above it by the
// complete integral minus an asymptotic tail.
inline constexpr double upsilon_switch = 8.0;

// int_0^P e(u g^theta) dg for u > 0 by half-cycle panels; first panel by tanh-sinh.
inline cplx upsilon_panels(double theta, double u, double P, double* err) {
    double X = u * power(P, theta);
    std::vector<double> cuts{0.0};
    for (int m = 1; m < 2 * X; ++m) cuts.push_back(std::min(P, std::pow(m / (2 * u), 1 / theta)));
    cuts.push_back(P);
    auto f = [&](double g) { return unit(u * power(g, theta)); };
    double e = 0;
    cplx total = 0;
    {
        boost::math::quadrature::tanh_sinh<double> ts;
        double er = 0, ei = 0;
        double hi = cuts[1];
        double re = ts.integrate([&](double g) { return g <= 0 ? 1.0 : f(g).real(); }, 0.0, hi,
                                 1e-13, &er);
        double im = ts.integrate([&](double g) { return g <= 0 ? 0.0 : f(g).imag(); }, 0.0, hi,
                                 1e-13, &ei);
        total += cplx(re, im);
        e += std::hypot(er, ei);
    }
    const auto& r = gk15();
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        if (!(hi > lo)) continue;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        cplx k = 0, gs = 0;
        for (int n = 0; n < 15; ++n) {
            cplx v = f(mid + half * r.x[n]);
            k += r.wk[n] * v;
            gs += r.wg[n] * v;
        }
        total += half * k;
        e += half * std::abs(k - gs);
    }
    if (err) *err = e;
    return total;
}

// int_X^inf w^a e(w) dw via the integration-by-parts series; valid for X >= upsilon_switch.
inline cplx upsilon_tail(double a, double X, double* err) {
    const cplx c(0, 2 * std::numbers::pi);
    const cplx ratio = -1.0 / (c * X);
    cplx term = std::pow(X, a), sum = 0;
    double last = std::abs(term);
    for (int n = 1; n < 400; ++n) {
        sum += term;
        cplx next = term * (a - n + 1) * ratio;
        double mag = std::abs(next);
        if (mag > last || mag < 1e-18 * std::abs(sum)) {
            last = mag;
            break;
        }
        term = next;
        last = mag;
    }
    if (err) *err = last / (2 * std::numbers::pi);
    return -unit(X) / c * sum;
}

inline cplx upsilon_positive(double theta, double u, double P, double* err) {
    double X = u * power(P, theta);
    if (X < upsilon_switch) return upsilon_panels(theta, u, P, err);
    const double a = 1 / theta - 1, b = 1 / theta;
    // int_0^inf e(y^theta) dy = Gamma(1/theta) (2 pi)^{-1/theta} e^{i pi/(2 theta)} / theta
    const cplx complete = std::tgamma(b) * std::pow(2 * std::numbers::pi, -b) *
                          std::polar(1.0, std::numbers::pi * b / 2) / theta;
    double te = 0;
    cplx tail = upsilon_tail(a, X, &te) / theta;
    double scale = std::pow(u, -b);
    if (err) *err = scale * (te / theta + 1e-15 * std::abs(complete));
    return scale * (complete - tail);
}

}  // namespace detail

// upsilon(lambda alpha) = int_0^P e(lambda alpha g^theta) dg
inline cplx upsilon(double theta, double lambda, double alpha, double P, double* err = nullptr) {
    require(P > 0, "upsilon needs P > 0");
    double u = lambda * alpha;
    if (err) *err = 0;
    if (u == 0) return P;
    cplx v = detail::upsilon_positive(theta, std::fabs(u), P, err);
    if (err && !(*err <= 1e-6 * P))
        throw budget_error("upsilon quadrature missed its tolerance", v.real(), *err);
    return u > 0 ? v : std::conj(v);
}

// |upsilon(u)| <= min(P, (1 + 1/(pi theta)) |u|^{-1/theta})
inline double upsilon_bound(double theta, double u, double P) {
    if (u == 0) return P;
    return std::min(P, (1 + 1 / (std::numbers::pi * theta)) * std::pow(std::fabs(u), -1 / theta));
}

// Phi(alpha) = prod_i upsilon(lambda_i alpha) * e(-alpha L)
inline cplx phi_product(const GeneralizedForm& form, double alpha, double P, double* err = nullptr) {
    cplx prod = 1;
    double rel = 0;
    for (double l : form.lambdas()) {
        double e = 0;
        cplx v = upsilon(form.theta(), l, alpha, P, &e);
        prod *= v;
        rel += e / std::max(std::abs(v), 1e-300);
    }
    if (form.shift() != 0) prod *= detail::unit(-alpha * form.shift());
    if (err) *err = rel * std::abs(prod);
    return prod;
}

inline double vdc_bound(double F, double X, int q) {
    require(F > 0 && X >= 1 && q >= 0, "vdc_bound needs F > 0, X >= 1, q >= 0");
    double Q = std::ldexp(1.0, q + 2) - 2;
    return std::pow(F, 1 / Q) * std::pow(X, 1 - (q + 2) / Q) + X / F;
}

struct MinorArcSup {
    double sup_abs;
    double argmax;
};

// max |f(lambda_1 alpha; P)| over a log-spaced grid on the positive minor arc,
// refined by Brent's method between the neighbours of the best grid point.
inline MinorArcSup minor_arc_sup(const GeneralizedForm& form, double P, const ArcDissection& d,
                                 int grid_points) {
    require(grid_points >= 1000, "minor_arc_sup needs at least 1000 grid points");
    require(P >= 1, "minor_arc_sup needs P >= 1");
    double lo = d.major_edge(), hi = d.trivial_edge();
    if (!(lo < hi)) throw validation_error("empty minor arc");
    const auto n = detail::floor_int(P);
    const double theta = form.theta(), l1 = form.lambdas().front();
    std::vector<double> pw(n);
    for (std::int64_t x = 1; x <= n; ++x) pw[x - 1] = l1 * detail::power(static_cast<double>(x), theta);
    auto mag = [&](double alpha) {
        long double re = 0, im = 0;
        for (double p : pw) {
            cplx z = detail::unit(alpha * p);
            re += z.real();
            im += z.imag();
        }
        return static_cast<double>(std::hypot(re, im));
    };
    if (n == 1) return {1.0, lo};
    const double ratio = std::log(hi / lo);
    auto node = [&](int i) { return lo * std::exp(ratio * i / grid_points); };
    std::vector<double> vals(grid_points);
    detail::parallel_for(grid_points, [&](std::size_t i) { vals[i] = mag(node(static_cast<int>(i))); });
    int best = 0;
    for (int i = 1; i < grid_points; ++i)
        if (vals[i] > vals[best]) best = i;
    MinorArcSup out{vals[best], node(best)};
    double a = node(std::max(best - 1, 0)), b = node(std::min(best + 1, grid_points - 1));
    if (b > a) {
        auto r = boost::math::tools::brent_find_minima([&](double x) { return -mag(x); }, a, b, 40);
        if (-r.second > out.sup_abs) out = {-r.second, r.first};
    }
    return out;
}

}  // namespace fraclab
