#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fraclab/forms.hpp"

using namespace fraclab;

TEST(Evaluate, Examples) {
    EXPECT_EQ(evaluate(GeneralizedForm(2.5, {1, -1}), {4, 4}), 0.0);
    EXPECT_EQ(evaluate(GeneralizedForm(2.5, {1, 1, 1}), {1, 1, 1}), 3.0);
    EXPECT_NEAR(evaluate(GeneralizedForm(2.5, {1, -1}), {2, 1}), 4.65685424949238019520675, 1e-13);
}

TEST(Evaluate, ShiftIsSubtracted) {
    GeneralizedForm f(2.5, {1, 1}, 0.75);
    EXPECT_DOUBLE_EQ(evaluate(f, {1, 1}), 1.25);
}

TEST(Evaluate, Errors) {
    GeneralizedForm f(2.5, {1, -1});
    EXPECT_THROW(evaluate(f, {1}), validation_error);
    EXPECT_THROW(evaluate(f, {0, 1}), validation_error);
}

TEST(Form, ConstructorGates) {
    EXPECT_THROW(GeneralizedForm(3.0, {1.0}), validation_error);
    EXPECT_THROW(GeneralizedForm(3.0 + 5e-10, {1.0}), validation_error);
    EXPECT_NO_THROW(GeneralizedForm(3.0 + 2e-9, {1.0}));
    EXPECT_THROW(GeneralizedForm(2.5, {1.0, 0.0}), validation_error);
    EXPECT_THROW(GeneralizedForm(2.5, {}), validation_error);
    EXPECT_THROW(GeneralizedForm(0.5, {1.0}), validation_error);
}

TEST(Form, SignsAndDefiniteness) {
    GeneralizedForm f(2.5, {1, std::sqrt(2.0), -std::sqrt(3.0)});
    ASSERT_EQ(f.signs().size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(f.signs()[i] * std::fabs(f.lambdas()[i]), f.lambdas()[i]);
    EXPECT_TRUE(f.indefinite());
    EXPECT_FALSE(GeneralizedForm(2.5, {1, 2}).indefinite());
    EXPECT_FALSE(GeneralizedForm(2.5, {-1, -2}).indefinite());
    EXPECT_FALSE(f.hypothesis_warning());
    EXPECT_TRUE(GeneralizedForm(1.5, {1, -1}).hypothesis_warning());
}

TEST(Evaluate, HomogeneousInLambda) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> X(1, 500);
    std::uniform_real_distribution<double> L(-3, 3);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> lam{L(rng), L(rng), L(rng)};
        GeneralizedForm f(2.5 + 0.13 * (it % 7), lam);
        std::vector<std::int64_t> x{X(rng), X(rng), X(rng)};
        for (double c : {2.0, 0.37, M_PI}) {
            double a = evaluate(f.scaled(c), x), b = c * evaluate(f, x);
            double scale = 0;
            for (std::size_t i = 0; i < 3; ++i) scale += std::fabs(c * lam[i]) * std::pow(double(x[i]), f.theta());
            EXPECT_LE(std::fabs(a - b), 1e-12 * scale);
        }
    }
}

TEST(FractionalBinomial, Examples) {
    EXPECT_EQ(fractional_binomial(2.5, 0), 1.0);
    EXPECT_EQ(fractional_binomial(2.5, 1), 2.5);
    EXPECT_EQ(fractional_binomial(2.5, 2), 1.875);
    EXPECT_EQ(fractional_binomial(2.5, 3), 0.3125);
    EXPECT_THROW(fractional_binomial(2.5, -1), validation_error);
}

TEST(FractionalBinomial, PascalIdentity) {
    for (double th : {2.5, 3.3, 4.7})
        for (int j = 1; j <= 10; ++j) {
            double lhs = fractional_binomial(th, j);
            double rhs = fractional_binomial(th - 1, j) + fractional_binomial(th - 1, j - 1);
            EXPECT_LE(std::fabs(lhs - rhs), 1e-10 * std::max(std::fabs(lhs), 1e-300)) << th << " " << j;
        }
}

TEST(TaylorFrame, DefaultsAndCoefficients) {
    TaylorFrame f(2.5, 1.0);
    EXPECT_EQ(f.k(), 6);
    EXPECT_EQ(TaylorFrame(3.3, 1.0).k(), 7);
    ASSERT_EQ(f.coeffs().size(), 7u);
    // 5/2, 15/8, 5/16, -5/128, 3/256, -5/1024, 5/2048
    const double exact[] = {2.5, 1.875, 0.3125, -5.0 / 128, 3.0 / 256, -5.0 / 1024, 5.0 / 2048};
    for (int j = 0; j < 7; ++j) EXPECT_NEAR(f.coeffs()[j], exact[j], 1e-12 * std::fabs(exact[j]));
    EXPECT_EQ(TaylorFrame(2.5, 1.0, 2).k(), 2);
    EXPECT_THROW(TaylorFrame(2.5, 1.0, 0), validation_error);
    EXPECT_THROW(TaylorFrame(2.5, 0.0), validation_error);
}

TEST(TaylorPolynomial, Examples) {
    TaylorFrame f(2.5, 1.0);
    EXPECT_EQ(taylor_polynomial(f, 0.0), 1.0);
    EXPECT_LE(std::fabs(taylor_polynomial(f, 0.1) - std::pow(1.1, 2.5)), std::fabs(f.b(7)) * 1e-7);
    // sum_{j<=6} b_j 2^{-j} with the rational b_j
    EXPECT_NEAR(taylor_polynomial(f, 0.5), 2.7556610107421875, 1e-15);
    EXPECT_THROW(taylor_polynomial(f, 1.0), validation_error);
    EXPECT_THROW(taylor_polynomial(f, -1.5), validation_error);
}

TEST(RemainderBound, Examples) {
    TaylorFrame f(2.5, 1.0);
    EXPECT_EQ(remainder_bound(f, 0.0), 0.0);
    EXPECT_NEAR(remainder_bound(f, 0.5), 1.9073486328125e-05, 1e-18);
    EXPECT_THROW(remainder_bound(f, -0.1), validation_error);
    EXPECT_THROW(remainder_bound(f, 1.0), validation_error);
}

namespace {

using mp = boost::multiprecision::cpp_bin_float_50;

mp taylor_mp(double theta, int k, double z) {
    mp zz = z, b = 1, acc = 1, zp = 1;
    for (int j = 1; j <= k; ++j) {
        b *= (mp(theta) - (j - 1)) / j;
        zp *= zz;
        acc += b * zp;
    }
    return acc;
}

mp remainder_mp(double theta, int k, double z) {
    return abs(pow(1 + mp(z), mp(theta)) - taylor_mp(theta, k, z));
}

}  // namespace

TEST(RemainderBound, DominatesTrueRemainder) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> T(2.0, 5.0), Z(0.0, 0.95);
    int checked = 0;
    while (checked < 2000) {
        double th = T(rng);
        if (near_integer(th)) continue;
        TaylorFrame f(th, 1.0);
        double z = Z(rng);
        mp truth = remainder_mp(th, f.k(), z);
        EXPECT_LE(truth, mp(remainder_bound(f, z)) * (1 + 1e-14)) << th << " " << z;
        ++checked;
    }
}

TEST(TaylorPolynomial, MatchesHighPrecision) {
    for (double z : {0.01, 0.3, 0.9}) {
        TaylorFrame f(3.3, 1.0);
        mp exact = taylor_mp(3.3, f.k(), z);
        EXPECT_NEAR(taylor_polynomial(f, z), static_cast<double>(exact), 1e-14 * std::pow(1 + z, 3.3));
    }
}

TEST(RemainderBound, SmallCustomKStillBounds) {
    // k + 1 <= theta: the (1+z)^{theta-k-1} factor keeps the bound valid
    TaylorFrame f(4.7, 1.0, 2);
    for (double z = 0.05; z < 0.95; z += 0.05) {
        double truth = std::fabs(std::pow(1 + z, 4.7) - taylor_polynomial(f, z));
        EXPECT_LE(truth, remainder_bound(f, z));
    }
}

TEST(HLinearForm, Examples) {
    TaylorFrame f1(2.5, 1.0);
    std::vector<std::int64_t> zero(6, 0), e1(6, 0), e2(6, 0);
    e1[0] = 1;
    e2[1] = 1;
    EXPECT_EQ(h_linear_form(f1, zero), 0.0);
    EXPECT_DOUBLE_EQ(h_linear_form(f1, e1), 2.5);
    EXPECT_DOUBLE_EQ(h_linear_form(TaylorFrame(2.5, 4.0), e2), 3.75);
    std::vector<std::int64_t> shorter(5, 0);
    EXPECT_THROW(h_linear_form(f1, shorter), validation_error);
}

TEST(Thresholds, Examples) {
    auto t = thresholds(2.5);
    EXPECT_EQ(t.k, 6);
    EXPECT_EQ(t.t_min, 21);
    EXPECT_EQ(t.s_indefinite, 43);
    EXPECT_EQ(t.s_restriction, 86);
    auto u = thresholds(3.5);
    EXPECT_EQ(u.k, 8);
    EXPECT_EQ(u.t_min, 36);
    EXPECT_EQ(u.s_indefinite, 73);
    EXPECT_EQ(u.s_restriction, 146);
    EXPECT_THROW(thresholds(3.0), validation_error);
}

TEST(Thresholds, ParityRelation) {
    for (double th = 2.05; th < 9; th += 0.1) {
        auto t = thresholds(th);
        EXPECT_EQ(2 * t.t_min, t.s_indefinite - 1);
        EXPECT_EQ(t.s_restriction, 2 * t.s_indefinite);
    }
}

TEST(S0Integer, TwoCaseRule) {
    // d = 4: 2d+2 = 10, r = 3, 10 < 3^2 + 3 so the subtracted term is 2
    EXPECT_EQ(s0_integer(4), 16);
    // d = 5: 12 >= 12, subtracted term 1
    EXPECT_EQ(s0_integer(5), 20 + 6 - 1);
    // d = 3: 8 >= 2^2 + 2
    EXPECT_EQ(s0_integer(3), 6 + 4 - 1);
    EXPECT_THROW(s0_integer(2), validation_error);
}
