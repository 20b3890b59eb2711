#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fraclab/detail/numeric.hpp"
#include "fraclab/detail/parallel.hpp"
#include "fraclab/errors.hpp"

namespace fraclab {

struct QuadratureSpec {
    double target_abs_error = 1e-6;
    std::size_t max_panels = std::size_t(1) << 24;
    // Cycles of the fastest phase allowed per panel.
    double phase_scale = 0.25;
};

template <class T>
struct QuadEstimate {
    T value{};
    double error = 0;
    std::size_t panels = 0;
};

namespace detail {

// 15-point Kronrod rule on [-1, 1] with the embedded 7-point Gauss weights.
struct GK15 {
    std::array<double, 15> x{}, wk{}, wg{};
    GK15() {
        using K = boost::math::quadrature::gauss_kronrod<double, 15>;
        const auto& ax = K::abscissa();
        const auto& aw = K::weights();
        using G = boost::math::quadrature::gauss<double, 7>;
        const auto& gw = G::weights();
        // Boost lists nonnegative nodes; Gauss nodes sit at even indices.
        int n = 0;
        for (int i = static_cast<int>(ax.size()) - 1; i >= 1; --i, ++n) {
            x[n] = -ax[i];
            wk[n] = aw[i];
            wg[n] = (i % 2 == 0) ? gw[i / 2] : 0.0;
        }
        x[n] = 0;
        wk[n] = aw[0];
        wg[n] = gw[0];
        ++n;
        for (std::size_t i = 1; i < ax.size(); ++i, ++n) {
            x[n] = ax[i];
            wk[n] = aw[i];
            wg[n] = (i % 2 == 0) ? gw[i / 2] : 0.0;
        }
    }
};

inline const GK15& gk15() {
    static const GK15 t;
    return t;
}

}  // namespace detail

// A progression evaluator fills out[p] = f(start + p*step) for p < count.
// Uniform G7K15 panels on [lo, hi]; error is the summed |K15 - G7| difference.
template <class Eval>
QuadEstimate<std::complex<double>> panel_integrate(const Eval& f, double lo, double hi,
                                                   std::size_t panels) {
    using detail::cplx;
    const auto& r = detail::gk15();
    const double w = (hi - lo) / static_cast<double>(panels);
    constexpr std::size_t block = 1024;
    const std::size_t nblocks = (panels + block - 1) / block;
    std::vector<cplx> bsum(nblocks);
    std::vector<double> berr(nblocks);
    detail::parallel_for(nblocks, [&](std::size_t bi) {
        std::size_t p0 = bi * block, cnt = std::min(block, panels - p0);
        std::vector<cplx> vals(15 * cnt);
        for (int n = 0; n < 15; ++n) {
            double start = lo + (static_cast<double>(p0) + 0.5 * (1.0 + r.x[n])) * w;
            f(start, w, cnt, vals.data() + n * cnt);
        }
        cplx acc = 0;
        double err = 0;
        for (std::size_t p = 0; p < cnt; ++p) {
            cplx k = 0, g = 0;
            for (int n = 0; n < 15; ++n) {
                const cplx v = vals[n * cnt + p];
                k += r.wk[n] * v;
                g += r.wg[n] * v;
            }
            acc += k;
            err += std::abs(k - g);
        }
        bsum[bi] = acc * (0.5 * w);
        berr[bi] = err * (0.5 * w);
    });
    QuadEstimate<cplx> out;
    for (std::size_t i = 0; i < nblocks; ++i) {
        out.value += bsum[i];
        out.error += berr[i];
    }
    out.panels = panels;
    return out;
}

// Panel count starts from the phase budget (rate = cycles per unit length) and
// doubles until the error estimate meets the target.
template <class Eval>
QuadEstimate<std::complex<double>> integrate_resolved(const Eval& f, double lo, double hi,
                                                      double rate, const QuadratureSpec& spec,
                                                      double target) {
    require(spec.target_abs_error > 0 && spec.phase_scale > 0 && spec.max_panels > 0,
            "invalid quadrature spec");
    if (!(hi > lo)) return {};
    double want = std::ceil((hi - lo) * rate / spec.phase_scale);
    std::size_t n = static_cast<std::size_t>(std::clamp(want, 1.0, 9e18));
    if (n > spec.max_panels)
        throw budget_error("phase resolution needs " + std::to_string(n) + " panels, budget is " +
                               std::to_string(spec.max_panels),
                           std::nan(""), std::nan(""));
    while (true) {
        auto est = panel_integrate(f, lo, hi, n);
        if (est.error <= target) return est;
        if (2 * n > spec.max_panels)
            throw budget_error("panel budget exhausted with error " + std::to_string(est.error),
                               est.value.real(), est.error);
        n *= 2;
    }
}

// Sums of e(c * alpha) over groups of coefficients, evaluated along an arithmetic
// progression of alpha by multiplicative recurrence with periodic resync.
class PhaseSumGrid {
public:
    static constexpr std::size_t resync = 128;

    std::size_t add_group(const std::vector<double>& coeffs) {
        offsets_.push_back(coeffs_.size());
        coeffs_.insert(coeffs_.end(), coeffs.begin(), coeffs.end());
        ends_.push_back(coeffs_.size());
        return offsets_.size() - 1;
    }

    std::size_t groups() const { return offsets_.size(); }

    // sums[p * groups() + g] = sum over group g at alpha = start + p*step.
    void run(double start, double step, std::size_t count, detail::cplx* sums) const {
        const std::size_t m = coeffs_.size(), G = groups();
        std::vector<double> zr(m), zi(m), sr(m), si(m);
        for (std::size_t j = 0; j < m; ++j) {
            auto s = detail::unit(coeffs_[j] * step);
            sr[j] = s.real();
            si[j] = s.imag();
        }
        for (std::size_t p = 0; p < count; ++p) {
            if (p % resync == 0) {
                double alpha = start + static_cast<double>(p) * step;
                for (std::size_t j = 0; j < m; ++j) {
                    auto z = detail::unit(coeffs_[j] * alpha);
                    zr[j] = z.real();
                    zi[j] = z.imag();
                }
            }
            for (std::size_t g = 0; g < G; ++g) {
                double re0 = 0, re1 = 0, im0 = 0, im1 = 0;
                std::size_t j = offsets_[g], e = ends_[g];
                for (; j + 1 < e; j += 2) {
                    re0 += zr[j];
                    im0 += zi[j];
                    re1 += zr[j + 1];
                    im1 += zi[j + 1];
                }
                if (j < e) {
                    re0 += zr[j];
                    im0 += zi[j];
                }
                sums[p * G + g] = {re0 + re1, im0 + im1};
            }
            for (std::size_t j = 0; j < m; ++j) {
                double nr = zr[j] * sr[j] - zi[j] * si[j];
                double ni = zr[j] * si[j] + zi[j] * sr[j];
                zr[j] = nr;
                zi[j] = ni;
            }
        }
    }

private:
    std::vector<double> coeffs_;
    std::vector<std::size_t> offsets_, ends_;
};

// Adapts a PhaseSumGrid plus a pointwise combiner into a progression evaluator.
template <class Combine>
struct GridIntegrand {
    const PhaseSumGrid& grid;
    Combine combine;  // combine(alpha, const cplx* group_sums) -> cplx

    void operator()(double start, double step, std::size_t count, detail::cplx* out) const {
        const std::size_t G = grid.groups();
        std::vector<detail::cplx> sums(count * G);
        grid.run(start, step, count, sums.data());
        for (std::size_t p = 0; p < count; ++p)
            out[p] = combine(start + static_cast<double>(p) * step, sums.data() + p * G);
    }
};

template <class Combine>
GridIntegrand<Combine> grid_integrand(const PhaseSumGrid& g, Combine c) {
    return {g, std::move(c)};
}

// Wraps a pointwise function alpha -> cplx as a progression evaluator.
template <class F>
struct PointwiseIntegrand {
    F f;
    void operator()(double start, double step, std::size_t count, detail::cplx* out) const {
        for (std::size_t p = 0; p < count; ++p) out[p] = f(start + static_cast<double>(p) * step);
    }
};

template <class F>
PointwiseIntegrand<F> pointwise(F f) {
    return {std::move(f)};
}

}  // namespace fraclab
