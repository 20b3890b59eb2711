#include <gtest/gtest.h>

#include <cmath>

#include "fraclab/asymptotics.hpp"

using namespace fraclab;

TEST(Gamma, Oracles) {
    EXPECT_NEAR(gamma_fn(1.4), 0.887263817503075289, 1e-14);
    EXPECT_NEAR(gamma_fn(1.0), 1.0, 1e-14);
    EXPECT_NEAR(gamma_fn(0.5), std::sqrt(M_PI), 1e-14);
    EXPECT_NEAR(gamma_fn(5.0), 24.0, 1e-12);
    EXPECT_THROW(gamma_fn(0.0), validation_error);
    EXPECT_THROW(gamma_fn(-1.5), validation_error);
}

TEST(Gamma, RecurrenceAndLibraryAgreement) {
    for (double x = 0.05; x < 20; x += 0.173) {
        EXPECT_NEAR(gamma_fn(x + 1), x * gamma_fn(x), 1e-13 * std::fabs(gamma_fn(x + 1))) << x;
        EXPECT_NEAR(gamma_fn(x), std::tgamma(x), 2e-14 * std::tgamma(x)) << x;
    }
}

TEST(DefiniteConstant, Oracles) {
    EXPECT_NEAR(definite_constant(3, 2.5, {1, 1, 1}), 1.52147845219983354, 1e-13);
    EXPECT_NEAR(definite_constant(1, 2.5, {1}), 0.8, 1e-14);
    // coefficient scaling: each lambda contributes lambda^{-1/theta}
    EXPECT_NEAR(definite_constant(2, 2.5, {2, 3}) / definite_constant(2, 2.5, {1, 1}),
                std::pow(6.0, -0.4), 1e-13);
    EXPECT_THROW(definite_constant(2, 2.5, {1, -1}), validation_error);
    EXPECT_THROW(definite_constant(2, 2.5, {1}), validation_error);
}

TEST(Omega, ClosedFormThreeVariables) {
    auto om = omega_constant(3, 2.5, {1, 1, -1});
    EXPECT_NEAR(om.value, 1.35237414501495329, 1e-8);
    EXPECT_EQ(om.method, OmegaMethod::nested_quadrature);
}

TEST(Omega, IrrationalCoefficients) {
    EXPECT_NEAR(omega_constant(3, 2.5, {1, std::sqrt(2.0), -std::sqrt(3.0)}).value, 1.009001354468, 1e-7);
}

TEST(Omega, PermutationAndSignFlipInvariance) {
    double a = omega_constant(3, 2.7, {1.0, -0.6, 2.0}).value;
    double b = omega_constant(3, 2.7, {2.0, 1.0, -0.6}).value;
    double c = omega_constant(3, 2.7, {-1.0, 0.6, -2.0}).value;
    EXPECT_NEAR(a, b, 1e-8 * a);
    EXPECT_NEAR(a, c, 1e-8 * a);
}

TEST(Omega, ScalingLaw) {
    // Omega(c lambda) = Omega(lambda) / c as a density of c F at 0
    double a = omega_constant(3, 2.5, {1, 1, -1}).value;
    double b = omega_constant(3, 2.5, {4, 4, -4}).value;
    EXPECT_NEAR(b, a / 4, 1e-8 * a);
}

TEST(Omega, MonteCarloAgreesWithQuadrature) {
    std::vector<double> lam{1, std::sqrt(2.0), -std::sqrt(3.0), -1.0};
    auto q = omega_constant(4, 2.5, lam);
    auto mc = omega_constant(4, 2.5, lam, OmegaMethod::monte_carlo, 200000, 7);
    EXPECT_GT(mc.std_error, 0);
    EXPECT_NEAR(mc.value, q.value, 4 * mc.std_error);
    auto again = omega_constant(4, 2.5, lam, OmegaMethod::monte_carlo, 200000, 7);
    EXPECT_EQ(mc.value, again.value);
}

TEST(Omega, VolumeOracleWhereBiasIsLinear) {
    // s/theta - 1 = 1: the eps-window bias is O(eps)
    auto q = omega_constant(3, 1.5, {1, 1, -1});
    auto v = omega_volume_oracle(3, 1.5, {1, 1, -1}, 1e-2, 2000000, 3);
    EXPECT_NEAR(v.value, q.value, 4 * v.std_error + 0.02 * q.value);
}

TEST(Omega, InputChecks) {
    EXPECT_THROW(omega_constant(3, 3.3, {1, -1, -1}), validation_error);
    EXPECT_THROW(omega_constant(3, 2.5, {1, 1, 1}), validation_error);
    EXPECT_THROW(omega_constant(3, 2.5, {1, -1}), validation_error);
    EXPECT_THROW(omega_constant(2, 2.5, {1, -1}), validation_error);
    EXPECT_THROW(omega_volume_oracle(3, 2.5, {1, 1, -1}, 0.1, 100000, 1), validation_error);
}

TEST(Predict, IndefiniteAndDefinite) {
    CountQuery q{GeneralizedForm(2.5, {1, 1, -1}), 100, 0.5};
    EXPECT_NEAR(predict(q, 2.0), 2 * 0.5 * 2.0 * 10.0, 1e-12);
    EXPECT_NEAR(predict(q), 1.35237414501495329 * 10.0, 1e-6);
    EXPECT_THROW(predict({GeneralizedForm(2.5, {1, 1}), 10, 1}, 1.0), validation_error);
    EXPECT_NEAR(predict_definite(3, 2.5, {1, 1, 1}, 1.0, 1e5),
                1.52147845219983354 * std::pow(1e5, 0.2), 1e-10);
}

TEST(FitExponent, RecoversPowerLaw) {
    std::vector<std::pair<double, double>> pts;
    for (double x : {10.0, 20.0, 40.0, 80.0}) pts.push_back({x, 3 * std::pow(x, 1.7)});
    auto f = fit_exponent(pts);
    EXPECT_NEAR(f.slope, 1.7, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-11);
    EXPECT_LT(f.residual, 1e-12);
    EXPECT_THROW(fit_exponent({{1, 1}, {1, 2}, {1, 3}}), validation_error);
}
