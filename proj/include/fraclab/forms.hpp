#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fraclab/detail/numeric.hpp"
#include "fraclab/errors.hpp"

namespace fraclab {

inline constexpr double integrality_gate = 1e-9;

inline bool near_integer(double theta) {
    return std::fabs(theta - std::nearbyint(theta)) <= integrality_gate;
}

inline void check_theta(double theta) {
    require(std::isfinite(theta) && theta > 1.0, "theta must be a finite real > 1");
    require(!near_integer(theta), "theta must be non-integral (|theta - round(theta)| > 1e-9)");
}

// F(x) = sum lambda_i x_i^theta - L over positive integers x.
class GeneralizedForm {
public:
    GeneralizedForm(double theta, std::vector<double> lambdas, double shift = 0.0)
        : theta_(theta), lambdas_(std::move(lambdas)), shift_(shift) {
        check_theta(theta_);
        require(!lambdas_.empty(), "form needs at least one coefficient");
        require(std::isfinite(shift_), "shift must be finite");
        for (double l : lambdas_) {
            require(std::isfinite(l) && l != 0.0, "coefficients must be finite and nonzero");
            signs_.push_back(l > 0 ? 1 : -1);
        }
    }

    double theta() const { return theta_; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    double shift() const { return shift_; }
    const std::vector<int>& signs() const { return signs_; }
    std::size_t s() const { return lambdas_.size(); }

    bool indefinite() const {
        for (int sg : signs_)
            if (sg != signs_.front()) return true;
        return false;
    }

    // The asymptotic theory assumes theta > 2; smaller values are allowed but flagged.
    bool hypothesis_warning() const { return theta_ <= 2.0; }

    GeneralizedForm scaled(double c) const {
        std::vector<double> l = lambdas_;
        for (double& v : l) v *= c;
        return GeneralizedForm(theta_, std::move(l), shift_ * c);
    }

private:
    double theta_;
    std::vector<double> lambdas_;
    double shift_;
    std::vector<int> signs_;
};

// Canonical evaluation: terms lambda_i * x_i^theta summed left to right from 0, then minus L.
inline double evaluate(const GeneralizedForm& form, std::span<const std::int64_t> x) {
    require(x.size() == form.s(), "dimension mismatch: x has " + std::to_string(x.size()) +
                                      " entries, form has " + std::to_string(form.s()));
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] >= 1, "x entries must be >= 1");
        acc += form.lambdas()[i] * detail::power(static_cast<double>(x[i]), form.theta());
    }
    return acc - form.shift();
}

inline double evaluate(const GeneralizedForm& form, std::initializer_list<std::int64_t> x) {
    return evaluate(form, std::span<const std::int64_t>(x.begin(), x.size()));
}

inline double fractional_binomial(double theta, int j) {
    require(j >= 0, "j must be nonnegative");
    double b = 1.0;
    for (int m = 0; m < j; ++m) b *= (theta - m) / (m + 1);
    return b;
}

// Coefficients of (1+z)^theta up to z^k plus the next one, anchored at a base Q.
class TaylorFrame {
public:
    TaylorFrame(double theta, double base) : TaylorFrame(theta, base, default_k(theta)) {}

    // Any k >= 1 is accepted for experiments; the default is floor(2 theta) + 1.
    TaylorFrame(double theta, double base, int k) : theta_(theta), k_(k), base_(base) {
        check_theta(theta);
        require(k >= 1, "k must be >= 1");
        require(std::isfinite(base) && base > 0, "base Q must be > 0");
        for (int j = 1; j <= k + 1; ++j) coeffs_.push_back(fractional_binomial(theta, j));
        for (int j = 1; j <= k; ++j) scaled_.push_back(coeffs_[j - 1] * std::pow(base, theta - j));
    }

    static int default_k(double theta) { return static_cast<int>(std::floor(2 * theta)) + 1; }

    double theta() const { return theta_; }
    int k() const { return k_; }
    double base() const { return base_; }
    // b_1 .. b_{k+1}
    const std::vector<double>& coeffs() const { return coeffs_; }
    double b(int j) const { return coeffs_.at(j - 1); }
    // b_j Q^{theta - j} for j = 1..k
    const std::vector<double>& scaled() const { return scaled_; }

private:
    double theta_;
    int k_;
    double base_;
    std::vector<double> coeffs_;
    std::vector<double> scaled_;
};

inline double taylor_polynomial(const TaylorFrame& f, double z) {
    require(std::fabs(z) < 1.0, "taylor_polynomial needs |z| < 1");
    double acc = 0.0, zp = 1.0;
    for (int j = 1; j <= f.k(); ++j) {
        zp *= z;
        acc += f.b(j) * zp;
    }
    return 1.0 + acc;
}

// Lagrange bound |b_{k+1}| z^{k+1} (1+z)^{max(0, theta-k-1)}. The last factor is 1
// for the default k and keeps the bound valid for small custom k.
inline double remainder_bound(const TaylorFrame& f, double z) {
    require(z >= 0.0 && z < 1.0, "remainder_bound needs 0 <= z < 1");
    double bound = std::fabs(f.b(f.k() + 1)) * std::pow(z, f.k() + 1);
    double excess = f.theta() - f.k() - 1;
    if (excess > 0) bound *= std::pow(1.0 + z, excess);
    return bound;
}

inline double h_linear_form(const TaylorFrame& f, std::span<const std::int64_t> h) {
    require(h.size() == static_cast<std::size_t>(f.k()), "h must have length k");
    double acc = 0.0;
    for (int j = 0; j < f.k(); ++j) acc += f.scaled()[j] * static_cast<double>(h[j]);
    return acc;
}

struct Thresholds {
    int k;
    int t_min;
    int s_indefinite;
    int s_restriction;
};

inline Thresholds thresholds(double theta) {
    check_theta(theta);
    int k = TaylorFrame::default_k(theta);
    return {k, k * (k + 1) / 2, k * (k + 1) + 1, 2 * k * (k + 1) + 2};
}

inline std::int64_t isqrt(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// s0(d) = d^2 - d + 2 floor(sqrt(2d+2)) - c(d), c(d) = 1 when 2d+2 >= r^2 + r, else 2.
inline std::int64_t s0_integer(std::int64_t d) {
    require(d >= 3, "s0_integer needs d >= 3");
    std::int64_t m = 2 * d + 2;
    std::int64_t r = isqrt(m);
    std::int64_t c = (m >= r * r + r) ? 1 : 2;
    return d * d - d + 2 * r - c;
}

}  // namespace fraclab
