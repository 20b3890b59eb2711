#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "fraclab/arcs.hpp"
#include "fraclab/asymptotics.hpp"
#include "fraclab/counting.hpp"
#include "fraclab/expsums.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

// An integral over the whole line split as quadrature over [-A, A] plus an analytic
// bound on what lies beyond A.
struct DhEstimate {
    cplx value = 0;
    double quad_error = 0;
    double tail_bound = 0;
    double cutoff = 0;
    std::size_t panels = 0;
    double error() const { return quad_error + tail_bound; }
};

namespace detail {

// f(lambda_i alpha) for every coefficient from one grid group per distinct |lambda_i|.
struct FormGrid {
    PhaseSumGrid grid;
    std::vector<std::size_t> group;
    std::vector<bool> negate;
    double rate = 0;  // cycles per unit alpha of the fastest product phase

    FormGrid(const GeneralizedForm& form, double P) {
        const auto n = floor_int(P);
        std::vector<double> mags;
        for (double l : form.lambdas()) {
            double m = std::fabs(l);
            auto it = std::find(mags.begin(), mags.end(), m);
            std::size_t g;
            if (it == mags.end()) {
                std::vector<double> c(n);
                for (std::int64_t x = 1; x <= n; ++x) c[x - 1] = m * power(static_cast<double>(x), form.theta());
                g = grid.add_group(c);
                mags.push_back(m);
            } else {
                g = static_cast<std::size_t>(it - mags.begin());
            }
            group.push_back(g);
            negate.push_back(l < 0);
            rate += m * power(static_cast<double>(n), form.theta());
        }
        rate += std::fabs(form.shift());
    }

    cplx product(const cplx* sums) const {
        cplx p = 1;
        for (std::size_t i = 0; i < group.size(); ++i) p *= negate[i] ? std::conj(sums[group[i]]) : sums[group[i]];
        return p;
    }
};

inline double box_count(const GeneralizedForm& form, double P) {
    return std::pow(static_cast<double>(floor_int(P)), static_cast<double>(form.s()));
}

// 2 Re int_lo^hi prod f_i(alpha) e(-alpha L) K(alpha) d alpha, 0 <= lo < hi; the mirror
// interval contributes the complex conjugate.
inline QuadEstimate<cplx> dh_piece(const FormGrid& fg, const GeneralizedForm& form,
                                   const FreemanKernel& K, double lo, double hi,
                                   const QuadratureSpec& spec, double target) {
    const double L = form.shift();
    auto f = grid_integrand(fg.grid, [&](double alpha, const cplx* sums) {
        cplx v = fg.product(sums) * freeman_eval(K, alpha);
        if (L != 0) v *= unit(-alpha * L);
        return v;
    });
    auto est = integrate_resolved(f, lo, hi, fg.rate + K.b, spec, 0.5 * target);
    return {cplx(2 * est.value.real(), 0), 2 * est.error, est.panels};
}

inline double dh_cutoff(const GeneralizedForm& form, double P, const FreemanKernel& K,
                        double tail_target) {
    require(tail_target > 0, "tail target must be positive");
    return freeman_tail_cutoff(K, tail_target / (2 * box_count(form, P)));
}

}  // namespace detail

// R(P) = int prod f_i(alpha) K(alpha) d alpha (with e(-alpha L) when the form is shifted).
inline DhEstimate r_pm(const GeneralizedForm& form, double P, const FreemanKernel& K,
                       const QuadratureSpec& spec, double tail_target) {
    require(P >= 1, "r_pm needs P >= 1");
    detail::FormGrid fg(form, P);
    DhEstimate out;
    out.cutoff = detail::dh_cutoff(form, P, K, tail_target);
    out.tail_bound = 2 * detail::box_count(form, P) * freeman_tail_integral(K, out.cutoff);
    auto est = detail::dh_piece(fg, form, K, 0.0, out.cutoff, spec, spec.target_abs_error);
    out.value = est.value;
    out.quad_error = est.error;
    out.panels = est.panels;
    return out;
}

// sum_x psi(F(x)) over the box: the exact value of r_pm.
inline double psi_sum(const GeneralizedForm& form, double P, const FreemanKernel& K) {
    CountQuery q{form, P, K.b, 0.0};
    detail::MitmPlan plan(q);
    const auto n = static_cast<std::size_t>(plan.n);
    std::vector<long double> part(n);
    plan.scan(q, n, [&](std::size_t blk, const std::vector<double>& bt, std::ptrdiff_t a,
                        std::ptrdiff_t d, std::ptrdiff_t, std::ptrdiff_t) {
        for (std::ptrdiff_t i = a; i < d; ++i)
            part[blk] += freeman_psi(K, plan.residual(q, static_cast<std::size_t>(i), bt));
    });
    long double t = 0;
    for (auto v : part) t += v;
    return static_cast<double>(t);
}

inline DhEstimate major_arc_integral(const GeneralizedForm& form, double P, const FreemanKernel& K,
                                     const QuadratureSpec& spec, const ArcOverrides& o = {}) {
    auto d = dissect(form.theta(), P, o);
    detail::FormGrid fg(form, P);
    auto est = detail::dh_piece(fg, form, K, 0.0, d.major_edge(), spec, spec.target_abs_error);
    DhEstimate out;
    out.value = est.value;
    out.quad_error = est.error;
    out.panels = est.panels;
    out.cutoff = d.major_edge();
    return out;
}

// int Phi(alpha) K(alpha) d alpha; the window [-A, A] comes from |upsilon| <= C |u|^{-1/theta}
// and |K| <= C_h |alpha|^{-h-1}.
inline DhEstimate singular_integral(const GeneralizedForm& form, double P, const FreemanKernel& K,
                                    const QuadratureSpec& spec,
                                    std::optional<double> tail_target = std::nullopt) {
    require(P > 0, "singular_integral needs P > 0");
    const double theta = form.theta(), tt = tail_target.value_or(spec.target_abs_error);
    require(tt > 0, "tail target must be positive");
    double D = 1, rate = std::fabs(form.shift()) + K.b;
    for (double l : form.lambdas()) {
        D *= (1 + 1 / (std::numbers::pi * theta)) * std::pow(std::fabs(l), -1 / theta);
        rate += std::fabs(l) * std::pow(P, theta);
    }
    const double e = static_cast<double>(form.s()) / theta + K.h;
    DhEstimate out;
    out.cutoff = std::pow(2 * D * K.tail_constant() / (e * tt), 1 / e);
    out.tail_bound = 2 * D * K.tail_constant() * std::pow(out.cutoff, -e) / e;
    auto f = pointwise([&](double alpha) { return phi_product(form, alpha, P) * freeman_eval(K, alpha); });
    auto est = integrate_resolved(f, 0.0, out.cutoff, rate, spec, 0.5 * spec.target_abs_error);
    out.value = 2 * est.value.real();
    out.quad_error = 2 * est.error;
    out.panels = est.panels;
    return out;
}

// int_{-kappa}^{kappa} |sum_{x in I} e(alpha x^theta)|^{2t} d alpha
inline QuadEstimate<double> mean_value_range(double theta, int t, double kappa, IntRange I,
                                             const QuadratureSpec& spec) {
    check_theta(theta);
    require(t >= 1 && kappa > 0, "mean_value needs t >= 1 and kappa > 0");
    require(I.size() >= 1, "mean_value needs a nonempty range");
    if (I.size() == 1) return {2 * kappa, 0.0, 1};
    PhaseSumGrid grid;
    std::vector<double> c;
    for (auto x = I.lo; x <= I.hi; ++x) c.push_back(detail::power(static_cast<double>(x), theta));
    grid.add_group(c);
    const double rate = t * (c.back() - c.front());
    auto f = grid_integrand(grid, [t](double, const cplx* s) { return cplx(std::pow(std::norm(s[0]), t), 0); });
    auto est = integrate_resolved(f, 0.0, kappa, rate, spec, 0.5 * spec.target_abs_error);
    return {2 * est.value.real(), 2 * est.error, est.panels};
}

inline QuadEstimate<double> mean_value(double theta, int t, double kappa, double P,
                                       const QuadratureSpec& spec) {
    require(P >= 1, "mean_value needs P >= 1");
    return mean_value_range(theta, t, kappa, unit_box(P), spec);
}

struct ArcParts {
    double major = 0, minor = 0, trivial = 0;
    double total = 0;
    double error = 0;          // quadrature error summed over arcs plus the tail beyond A
    double trivial_bound = 0;  // analytic bound on |trivial-arc part|
    double cutoff = 0;
};

struct PipelineRow {
    double P = 0;
    double tau = 0;
    std::uint64_t N = 0;
    ArcParts minus, plus;
    double predicted = std::nan("");
    double ratio = std::nan("");
    bool sandwich_ok = false;
    bool trivial_ok = false;
    double elapsed = 0;
};

namespace detail {

inline ArcParts arc_parts(const GeneralizedForm& form, double P, const FreemanKernel& K,
                          const ArcDissection& d, const QuadratureSpec& spec, double tail_target) {
    FormGrid fg(form, P);
    ArcParts r;
    r.cutoff = dh_cutoff(form, P, K, tail_target);
    const double m = std::min(d.major_edge(), r.cutoff), t = std::min(d.trivial_edge(), r.cutoff);
    auto piece = [&](double lo, double hi) -> QuadEstimate<cplx> {
        if (!(hi > lo)) return {};
        return dh_piece(fg, form, K, lo, hi, spec, spec.target_abs_error);
    };
    auto a = piece(0.0, m), b = piece(m, t), c = piece(t, r.cutoff);
    const double box = box_count(form, P);
    r.major = a.value.real();
    r.minor = b.value.real();
    r.trivial = c.value.real();
    r.total = r.major + r.minor + r.trivial;
    double tail = 2 * box * freeman_tail_integral(K, r.cutoff);
    r.error = a.error + b.error + c.error + tail;
    r.trivial_bound = 2 * box * freeman_tail_integral(K, d.trivial_edge());
    return r;
}

}  // namespace detail

// N, R-, R+ split over the three arcs, and the sandwich R- <= N <= R+.
inline PipelineRow pipeline_report(const GeneralizedForm& form, double P, double tau, int h,
                                   const QuadratureSpec& spec, double tail_target = 0.05,
                                   const ArcOverrides& o = {},
                                   std::optional<double> omega = std::nullopt) {
    auto t0 = std::chrono::steady_clock::now();
    PipelineRow row;
    row.P = P;
    row.tau = tau;
    CountQuery q{form, P, tau, 0.0};
    row.N = count_mitm(q).count;
    auto kp = make_kernel_pair(tau, P, h);
    auto d = dissect(form.theta(), P, o);
    row.minus = detail::arc_parts(form, P, kp.minus, d, spec, tail_target);
    row.plus = detail::arc_parts(form, P, kp.plus, d, spec, tail_target);
    const double N = static_cast<double>(row.N);
    row.sandwich_ok = row.minus.total - row.minus.error <= N && N <= row.plus.total + row.plus.error;
    auto tr_ok = [](const ArcParts& a) { return std::fabs(a.trivial) <= a.trivial_bound + a.error; };
    row.trivial_ok = tr_ok(row.minus) && tr_ok(row.plus);
    if (form.indefinite() && static_cast<double>(form.s()) > form.theta()) {
        double om = omega ? *omega
                          : omega_constant(static_cast<int>(form.s()), form.theta(), form.lambdas()).value;
        row.predicted = predict(q, om);
        row.ratio = N / row.predicted;
    }
    row.elapsed = detail::seconds_since(t0);
    return row;
}

}  // namespace fraclab
