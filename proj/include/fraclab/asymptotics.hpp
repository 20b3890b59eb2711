#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fraclab/counting.hpp"
#include "fraclab/detail/numeric.hpp"
#include "fraclab/detail/parallel.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"

namespace fraclab {

// Lanczos (g = 7, n = 9) with the recurrence for x < 1/2.
inline double gamma_fn(double x) {
    require(std::isfinite(x) && x > 0, "gamma_fn needs x > 0");
    if (x < 0.5) return gamma_fn(x + 1) / x;
    static constexpr std::array<double, 9> p{
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7;
    x -= 1;
    double a = p[0];
    for (int i = 1; i < 9; ++i) a += p[i] / (x + i);
    double t = x + g + 0.5;
    return std::sqrt(2 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

// 2 (prod lambda)^{-1/theta} Gamma(1 + 1/theta)^s / Gamma(s/theta)
inline double definite_constant(int s, double theta, const std::vector<double>& lambdas) {
    check_theta(theta);
    require(s >= 1 && lambdas.size() == static_cast<std::size_t>(s), "need s positive coefficients");
    double logprod = 0;
    for (double l : lambdas) {
        require(l > 0, "definite_constant needs positive coefficients");
        logprod += std::log(l);
    }
    return 2 * std::exp(-logprod / theta) * std::pow(gamma_fn(1 + 1 / theta), s) / gamma_fn(s / theta);
}

enum class OmegaMethod { nested_quadrature, monte_carlo, volume_oracle };

inline std::string to_string(OmegaMethod m) {
    switch (m) {
        case OmegaMethod::nested_quadrature: return "nested-quadrature";
        case OmegaMethod::monte_carlo: return "monte-carlo";
        case OmegaMethod::volume_oracle: return "volume-oracle";
    }
    return "?";
}

struct OmegaEstimate {
    double value = 0;
    OmegaMethod method = OmegaMethod::nested_quadrature;
    double std_error = 0;
    int s = 0;
    double theta = 0;
    std::vector<double> lambdas;
};

namespace detail {

// Omega is the density at 0 of sum lambda_i g_i^theta for g uniform on [0,1]^s.
// Resolving the last coordinate leaves
//   Omega = (1/theta) |lambda_s|^{-1/theta} int_{[0,1]^{s-1}} c^{1/theta-1} [0 <= c <= |lambda_s|]
// with c = -sign(lambda_s) sum_{i<s} lambda_i g_i^theta.
class OmegaIntegral {
public:
    OmegaIntegral(double theta, std::vector<double> lambdas, double tol)
        : theta_(theta), a_(1 / theta - 1), b_(1 / theta), tol_(tol) {
        // resolve the coefficient of largest modulus
        auto it = std::max_element(lambdas.begin(), lambdas.end(),
                                   [](double x, double y) { return std::fabs(x) < std::fabs(y); });
        last_ = *it;
        lambdas.erase(it);
        mu_ = std::move(lambdas);
        sigma_ = last_ > 0 ? 1 : -1;
        cap_ = std::fabs(last_);
    }

    double prefactor() const { return std::pow(cap_, -b_) / theta_; }

    // Integral over the remaining coordinates j.. given partial sum R.
    double level(std::size_t j, double R) const {
        if (j + 1 == mu_.size()) return innermost(R);
        std::vector<double> cuts{0.0, 1.0};
        const std::size_t rest = mu_.size() - j - 1;
        for (std::size_t mask = 0; mask < (std::size_t(1) << rest); ++mask) {
            double sub = 0;
            for (std::size_t i = 0; i < rest; ++i)
                if (mask >> i & 1) sub += mu_[j + 1 + i];
            for (double t : {0.0, -last_}) {
                double v = (t - R - sub) / mu_[j];
                if (v > 0 && v < 1) cuts.push_back(std::pow(v, b_));
            }
        }
        std::sort(cuts.begin(), cuts.end());
        boost::math::quadrature::tanh_sinh<double> ts(12);
        double total = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double lo = cuts[i], len = cuts[i + 1] - cuts[i];
            if (!(len > 1e-15)) continue;
            total += len * ts.integrate(
                               [&](double y) {
                                   double g = lo + len * y;
                                   double v = level(j + 1, R + mu_[j] * power(g, theta_));
                                   return std::isfinite(v) ? v : 0.0;
                               },
                               0.0, 1.0, tol_);
        }
        return total;
    }

    std::size_t dims() const { return mu_.size(); }
    const std::vector<double>& mu() const { return mu_; }

    // (1/theta) int_0^1 v^{b-1} c(v)^a dv over 0 <= c(v) <= cap, c(v) = A + B v,
    // with v = g^theta for the innermost coordinate.
    double innermost(double R) const {
        const double A = -sigma_ * R, B = -sigma_ * mu_.back();
        double vlo = 0, vhi = 1;
        if (B > 0) {
            vlo = std::max(vlo, -A / B);
            vhi = std::min(vhi, (cap_ - A) / B);
        } else {
            vlo = std::max(vlo, (cap_ - A) / B);
            vhi = std::min(vhi, -A / B);
        }
        if (!(vhi > vlo)) return 0;
        // c and v vanish together only on a null set (underflowed outer nodes)
        if (A == 0 && vlo == 0) return 0;
        const bool zero_left = B > 0 && vlo > 0 && vlo == -A / B;
        const bool zero_right = B < 0 && vhi < 1 && vhi == -A / B;
        const double m = 0.5 * (vlo + vhi);
        const double absB = std::fabs(B);
        boost::math::quadrature::tanh_sinh<double> ts(12);
        auto plain = [&](double v) {
            double r = std::pow(v, b_ - 1) * std::pow(A + B * v, a_) / theta_;
            return std::isfinite(r) ? r : 0.0;
        };
        double total = 0;
        // left half
        if (vlo == 0) {
            // v = m y^theta removes v^{b-1}
            total += ts.integrate(
                [&](double y) {
                    double r = std::pow(m, b_) * std::pow(A + B * m * power(y, theta_), a_);
                    return std::isfinite(r) ? r : 0.0;
                },
                0.0, 1.0, tol_);
        } else if (zero_left) {
            const double len = m - vlo;
            total += ts.integrate(
                [&](double y) {
                    double v = vlo + len * power(y, theta_);
                    return std::pow(v, b_ - 1) * std::pow(absB, a_) * std::pow(len, b_);
                },
                0.0, 1.0, tol_);
        } else if (m - vlo > 1e-15) {
            total += (m - vlo) * ts.integrate([&](double y) { return plain(vlo + (m - vlo) * y); }, 0.0, 1.0, tol_);
        }
        // right half
        if (zero_right) {
            const double len = vhi - m;
            total += ts.integrate(
                [&](double y) {
                    double v = vhi - len * power(y, theta_);
                    return std::pow(v, b_ - 1) * std::pow(absB, a_) * std::pow(len, b_);
                },
                0.0, 1.0, tol_);
        } else if (vhi - m > 1e-15) {
            total += (vhi - m) * ts.integrate([&](double y) { return plain(m + (vhi - m) * y); }, 0.0, 1.0, tol_);
        }
        return total;
    }

private:
    double theta_, a_, b_, tol_;
    double last_ = 0;
    int sigma_ = 1;
    double cap_ = 0;
    std::vector<double> mu_;
};

inline void check_omega_input(int s, double theta, const std::vector<double>& lambdas) {
    check_theta(theta);
    require(s >= 2 && lambdas.size() == static_cast<std::size_t>(s), "lambdas must have length s >= 2");
    bool pos = false, neg = false;
    for (double l : lambdas) {
        require(std::isfinite(l) && l != 0, "coefficients must be finite and nonzero");
        (l > 0 ? pos : neg) = true;
    }
    require(pos && neg, "Omega needs coefficients of both signs; use definite_constant");
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(stream)};
    std::array<std::uint64_t, 1> out{};
    std::array<std::uint32_t, 2> w{};
    sq.generate(w.begin(), w.end());
    out[0] = (std::uint64_t(w[0]) << 32) | w[1];
    return out[0];
}

inline constexpr int mc_streams = 16;

}  // namespace detail

// Omega(s, theta; lambda) = theta^{-s} |prod lambda|^{-1/theta} Psi(0), evaluated as the
// density at 0 of sum lambda_i g_i^theta over the unit cube. Finite only for s > theta.
// budget: Monte-Carlo sample count (also selects that path when method says so).
inline OmegaEstimate omega_constant(int s, double theta, const std::vector<double>& lambdas,
                                    OmegaMethod method = OmegaMethod::nested_quadrature,
                                    std::uint64_t budget = 1000000, std::uint64_t seed = 1) {
    detail::check_omega_input(s, theta, lambdas);
    require(s > theta, "Omega diverges unless s > theta");
    OmegaEstimate out{0, method, 0, s, theta, lambdas};
    if (method == OmegaMethod::nested_quadrature) {
        require(s <= 5, "nested quadrature handles s <= 5; use the monte-carlo method");
        detail::OmegaIntegral I(theta, lambdas, 1e-9);
        out.value = I.prefactor() * I.level(0, 0.0);
        return out;
    }
    require(method == OmegaMethod::monte_carlo, "use omega_volume_oracle for the volume method");
    require(budget >= 1000, "monte-carlo budget must be >= 1000 samples");
    detail::OmegaIntegral I(theta, lambdas, 1e-9);
    const std::size_t outer = I.dims() - 1;
    if (outer == 0) {
        out.value = I.prefactor() * I.innermost(0.0);
        return out;
    }
    std::vector<double> sum(detail::mc_streams), sq(detail::mc_streams);
    std::vector<std::uint64_t> cnt(detail::mc_streams);
    detail::parallel_for(detail::mc_streams, [&](std::size_t st) {
        std::mt19937_64 rng(detail::stream_seed(seed, st));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::uint64_t n = budget / detail::mc_streams + (st < budget % detail::mc_streams ? 1 : 0);
        long double s1 = 0, s2 = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            double R = 0;
            for (std::size_t i = 0; i < outer; ++i) R += I.mu()[i] * detail::power(U(rng), theta);
            double v = I.innermost(R);
            s1 += v;
            s2 += v * v;
        }
        sum[st] = static_cast<double>(s1);
        sq[st] = static_cast<double>(s2);
        cnt[st] = n;
    });
    long double s1 = 0, s2 = 0, n = 0;
    for (int st = 0; st < detail::mc_streams; ++st) {
        s1 += sum[st];
        s2 += sq[st];
        n += cnt[st];
    }
    double mean = static_cast<double>(s1 / n);
    double var = static_cast<double>(s2 / n) - mean * mean;
    out.value = I.prefactor() * mean;
    out.std_error = I.prefactor() * std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    return out;
}

// vol{g in [0,1]^s : |sum lambda_i g_i^theta| < eps} / (2 eps) by plain Monte Carlo.
inline OmegaEstimate omega_volume_oracle(int s, double theta, const std::vector<double>& lambdas,
                                         double eps, std::uint64_t samples, std::uint64_t seed) {
    check_theta(theta);
    require(s >= 1 && lambdas.size() == static_cast<std::size_t>(s), "lambdas must have length s");
    require(eps > 0 && eps <= 1e-2, "eps must lie in (0, 1e-2]");
    require(samples >= 100000, "volume oracle needs at least 1e5 samples");
    std::vector<std::uint64_t> hits(detail::mc_streams), cnt(detail::mc_streams);
    detail::parallel_for(detail::mc_streams, [&](std::size_t st) {
        std::mt19937_64 rng(detail::stream_seed(seed, st));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::uint64_t n = samples / detail::mc_streams + (st < samples % detail::mc_streams ? 1 : 0);
        std::uint64_t h = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            double F = 0;
            for (double l : lambdas) F += l * detail::power(U(rng), theta);
            if (std::fabs(F) < eps) ++h;
        }
        hits[st] = h;
        cnt[st] = n;
    });
    std::uint64_t H = 0, N = 0;
    for (int st = 0; st < detail::mc_streams; ++st) {
        H += hits[st];
        N += cnt[st];
    }
    if (H == 0) throw budget_error("volume oracle recorded zero hits; eps too small for the budget", 0, 0);
    double p = static_cast<double>(H) / static_cast<double>(N);
    OmegaEstimate out{p / (2 * eps), OmegaMethod::volume_oracle, 0, s, theta, lambdas};
    out.std_error = std::sqrt(p * (1 - p) / static_cast<double>(N)) / (2 * eps);
    return out;
}

// 2 tau Omega P^{s-theta}
inline double predict(const CountQuery& q, double omega) {
    require(q.form.indefinite(), "predict needs an indefinite form; use predict_definite");
    return 2 * q.tau * omega * std::pow(q.P, static_cast<double>(q.form.s()) - q.form.theta());
}

inline double predict(const CountQuery& q) {
    require(q.form.indefinite(), "predict needs an indefinite form; use predict_definite");
    auto om = omega_constant(static_cast<int>(q.form.s()), q.form.theta(), q.form.lambdas());
    return predict(q, om.value);
}

// definite_constant * tau * nu^{s/theta - 1}
inline double predict_definite(int s, double theta, const std::vector<double>& lambdas, double tau,
                               double nu) {
    require(nu > 0, "predict_definite needs nu > 0");
    return definite_constant(s, theta, lambdas) * tau * std::pow(nu, s / theta - 1);
}

// Box side used for the definite count at target nu: 2 (sum lambda^{-1/theta} + 1) nu^{1/theta}.
inline double definite_box(double theta, const std::vector<double>& lambdas, double nu) {
    double acc = 0;
    for (double l : lambdas) acc += std::pow(l, -1 / theta);
    return 2 * (acc + 1) * std::pow(nu, 1 / theta);
}

struct ExponentFit {
    double slope;
    double intercept;
    double residual;  // RMS of log residuals
};

inline ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
    require(points.size() >= 3, "fit_exponent needs at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (auto [x, y] : points) {
        require(x > 0 && y > 0, "fit_exponent needs positive scales and values");
        double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double den = n * sxx - sx * sx;
    require(den > 0, "fit_exponent needs at least two distinct scales");
    double slope = (n * sxy - sx * sy) / den;
    double icpt = (sy - slope * sx) / n;
    double rss = 0;
    for (auto [x, y] : points) {
        double r = std::log(y) - (icpt + slope * std::log(x));
        rss += r * r;
    }
    return {slope, icpt, std::sqrt(rss / n)};
}

}  // namespace fraclab
