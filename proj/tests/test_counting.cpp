#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "fraclab/counting.hpp"

using namespace fraclab;

namespace {

// Plain odometer over [1, n]^s with the canonical evaluator.
std::uint64_t enumerate(const CountQuery& q) {
    const auto n = static_cast<std::int64_t>(std::floor(q.P));
    std::vector<std::int64_t> x(q.form.s(), 1);
    std::uint64_t c = 0;
    while (true) {
        if (std::fabs(evaluate(q.form, x) - q.nu) < q.tau) ++c;
        std::size_t i = x.size();
        while (i > 0 && x[i - 1] == n) x[--i] = 1;
        if (i == 0) return c;
        ++x[i - 1];
    }
}

CountQuery random_query(std::mt19937_64& rng, int max_s, double max_P) {
    std::uniform_int_distribution<int> S(1, max_s);
    std::uniform_real_distribution<double> T(2.05, 4.95), L(0.2, 3.0), U(0, 1);
    int s = S(rng);
    double theta = T(rng);
    if (near_integer(theta)) theta += 0.1;
    std::vector<double> lam;
    for (int i = 0; i < s; ++i) lam.push_back(L(rng) * (U(rng) < 0.5 ? -1 : 1));
    double P = 1 + U(rng) * (std::pow(max_P, std::min(1.0, 4.0 / s)) - 1);
    double shift = U(rng) < 0.3 ? 5 * U(rng) : 0.0;
    double tau = 0.05 + 3 * U(rng);
    double nu = U(rng) < 0.3 ? 50 * U(rng) : 0.0;
    return {GeneralizedForm(theta, lam, shift), P, tau, nu};
}

}  // namespace

TEST(Count, Oracles) {
    GeneralizedForm f(2.5, {1.0, std::sqrt(2.0), -std::sqrt(3.0)});
    EXPECT_EQ(count_mitm({f, 40, 1.0}).count, 11u);
    EXPECT_EQ(count_mitm({f, 80, 1.0}).count, 15u);
    EXPECT_EQ(count_mitm({f, 200, 1.0}).count, 25u);
    EXPECT_EQ(count_brute({f, 40, 1.0}).count, 11u);
}

TEST(Count, SmallExamples) {
    GeneralizedForm d(2.5, {1, -1});
    // only the diagonal x1 = x2 has |x1^2.5 - x2^2.5| < 1/2
    EXPECT_EQ(count_brute({d, 10, 0.5}).count, 10u);
    EXPECT_EQ(count_mitm({d, 10, 0.5}).count, 10u);
    GeneralizedForm one(2.5, {1.0});
    EXPECT_EQ(count_mitm({one, 100, 0.5, 32.0}).count, 1u);  // 4^2.5 = 32
    EXPECT_EQ(count_mitm({one, 3.99, 0.5, 32.0}).count, 0u);
}

TEST(Count, StrictInequalityAtIntegerValues) {
    // x^2.5 is an integer for square x; F = 32 - 1 = 31 exactly at (4, 1)
    GeneralizedForm f(2.5, {1.0, -1.0});
    CountQuery q{f, 4, 1.0, 30.0};
    EXPECT_EQ(count_brute(q).count, enumerate(q));
    EXPECT_EQ(count_mitm(q).count, enumerate(q));
    EXPECT_GE(count_mitm(q).near_boundary, 1u);
}

TEST(Count, MitmMatchesBruteOnRandomQueries) {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 200; ++it) {
        auto q = random_query(rng, 5, 40);
        auto b = count_brute(q), m = count_mitm(q);
        ASSERT_EQ(b.count, m.count) << "query " << it;
        EXPECT_EQ(b.near_boundary, m.near_boundary) << "query " << it;
        if (it < 40) {
            EXPECT_EQ(b.count, enumerate(q)) << "query " << it;
        }
    }
}

TEST(Count, ScalingInvariance) {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 50; ++it) {
        auto q = random_query(rng, 4, 30);
        for (double c : {2.0, 0.25, 1024.0}) {
            CountQuery r{q.form.scaled(c), q.P, q.tau * c, q.nu * c};
            EXPECT_EQ(count_mitm(q).count, count_mitm(r).count) << it << " " << c;
        }
    }
}

TEST(Count, MonotoneInTauAndP) {
    GeneralizedForm f(3.3, {1.0, 2.0, -1.5});
    std::uint64_t prev = 0;
    for (double tau : {0.1, 0.5, 1.0, 5.0, 20.0}) {
        auto c = count_mitm({f, 25, tau}).count;
        EXPECT_GE(c, prev);
        prev = c;
    }
    prev = 0;
    for (double P : {5.0, 10.0, 20.0, 40.0}) {
        auto c = count_mitm({f, P, 1.0}).count;
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(Count, Guards) {
    GeneralizedForm f(2.5, {1, 1, 1, 1, 1, -1});
    EXPECT_THROW(count_brute({f, 30, 1.0}), guard_error);
    EXPECT_THROW(count_mitm({f, 500, 1.0}), guard_error);
    EXPECT_THROW(count_mitm({f, 0.5, 1.0}), validation_error);
    EXPECT_THROW(count_mitm({f, 10, 0.0}), validation_error);
}

TEST(Tent, Oracle) {
    GeneralizedForm f(2.5, {1, 1, 1});
    EXPECT_NEAR(tent_count({f, 50.4766, 1.0, 100.0}), 1.486017717537436, 1e-12);
}

TEST(Tent, Sandwich) {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 100; ++it) {
        auto q = random_query(rng, 4, 40);
        CountQuery twice = q;
        twice.tau *= 2;
        double lo = tent_count(q), hi = 2 * tent_count(twice);
        auto c = static_cast<double>(count_mitm(q).count);
        EXPECT_LE(lo, c) << it;
        EXPECT_LE(c, hi) << it;
    }
}

TEST(Vt, OracleAndSymmetry) {
    EXPECT_EQ(count_Vt(2.5, 2, {1, 30}, {1, 30}, 0.5), 1834u);
    // t = 1: only the diagonal when delta is below the minimal gap
    EXPECT_EQ(count_Vt(2.5, 1, {1, 50}, {1, 50}, 0.5), 50u);
    EXPECT_THROW(count_Vt(2.5, 0, {1, 5}, {1, 5}, 0.5), validation_error);
    EXPECT_THROW(count_Vt(2.5, 3, {1, 1000}, {1, 1000}, 0.5), guard_error);
}

TEST(Vt, MatchesDirectEnumeration) {
    const double th = 2.7, delta = 3.0;
    IntRange I1{5, 12}, I2{3, 9};
    std::uint64_t direct = 0;
    auto p = [&](std::int64_t x) { return detail::power(double(x), th); };
    for (auto a = I1.lo; a <= I1.hi; ++a)
        for (auto c = I1.lo; c <= I1.hi; ++c)
            for (auto b = I2.lo; b <= I2.hi; ++b)
                for (auto d = I2.lo; d <= I2.hi; ++d)
                    if (std::fabs((p(a) + p(b)) - (p(c) + p(d))) < delta) ++direct;
    EXPECT_EQ(count_Vt(th, 2, I1, I2, delta), direct);
}

namespace {

std::uint64_t vinogradov_brute(int t, int k, std::int64_t Y, const std::vector<std::int64_t>& h) {
    std::vector<std::int64_t> y(2 * t, 1);
    std::uint64_t c = 0;
    while (true) {
        bool ok = true;
        for (int j = 1; j <= k && ok; ++j) {
            std::int64_t acc = 0;
            for (int i = 0; i < t; ++i) {
                std::int64_t a = 1, b = 1;
                for (int e = 0; e < j; ++e) {
                    a *= y[i];
                    b *= y[t + i];
                }
                acc += a - b;
            }
            ok = acc == h[j - 1];
        }
        c += ok;
        std::size_t i = y.size();
        while (i > 0 && y[i - 1] == Y) y[--i] = 1;
        if (i == 0) return c;
        ++y[i - 1];
    }
}

}  // namespace

TEST(Vinogradov, Oracles) {
    EXPECT_EQ(vinogradov_J(2, 2, 10, {0, 0}), 190u);
    EXPECT_EQ(vinogradov_J(2, 2, 20, {0, 0}), 780u);
    EXPECT_EQ(vinogradov_J(2, 2, 40, {0, 0}), 3160u);
    EXPECT_EQ(vinogradov_J(3, 2, 10, {0, 0}), 5788u);
    EXPECT_EQ(vinogradov_J(3, 2, 20, {0, 0}), 56504u);
    EXPECT_EQ(vinogradov_J(3, 2, 40, {0, 0}), 534136u);
    EXPECT_EQ(vinogradov_J(2, 3, 10, {0, 0, 0}), 190u);
    EXPECT_EQ(vinogradov_J(2, 3, 40, {0, 0, 0}), 3160u);
    EXPECT_EQ(vinogradov_J(2, 1, 5, {0}), 85u);
}

TEST(Vinogradov, MatchesBruteOnSmallSystems) {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 50; ++it) {
        int t = 1 + static_cast<int>(rng() % 3), k = 1 + static_cast<int>(rng() % 3);
        std::int64_t Y = 2 + static_cast<std::int64_t>(rng() % (t == 3 ? 5 : 8));
        std::vector<std::int64_t> h(k, 0);
        if (it % 2) {
            // a shift realised by a random tuple so the count is usually nonzero
            std::vector<std::int64_t> y(2 * t);
            for (auto& v : y) v = 1 + static_cast<std::int64_t>(rng() % Y);
            for (int j = 1; j <= k; ++j)
                for (int i = 0; i < t; ++i)
                    h[j - 1] += static_cast<std::int64_t>(std::pow(y[i], j) - std::pow(y[t + i], j));
        }
        EXPECT_EQ(vinogradov_J(t, k, Y, h), vinogradov_brute(t, k, Y, h)) << it;
    }
}

TEST(Vinogradov, ShiftNeverIncreasesAndDiagonalFloor) {
    for (auto [t, k] : {std::pair{2, 2}, {3, 2}, {2, 3}})
        for (std::int64_t Y : {10, 20}) {
            std::vector<std::int64_t> zero(k, 0);
            auto J0 = vinogradov_J(t, k, Y, zero);
            EXPECT_GE(static_cast<double>(J0), std::pow(double(Y), t));
            for (std::int64_t a : {1, 3, 7}) {
                std::vector<std::int64_t> h(k, 0);
                h[0] = a;
                h[k - 1] += 2 * a;
                EXPECT_LE(vinogradov_J(t, k, Y, h), J0);
            }
        }
    EXPECT_THROW(vinogradov_J(2, 2, 10, {0}), validation_error);
    EXPECT_THROW(vinogradov_J(5, 2, 100, {0, 0}), guard_error);
}

namespace {

std::uint64_t lattice_full(const TaylorFrame& f, int t, double window) {
    auto H = lattice_ranges(f, t);
    std::vector<std::int64_t> h(H.size());
    for (std::size_t j = 0; j < H.size(); ++j) h[j] = -H[j];
    std::uint64_t c = 0;
    while (true) {
        if (std::fabs(h_linear_form(f, h)) <= window) ++c;
        std::size_t j = h.size();
        while (j > 0 && h[j - 1] == H[j - 1]) {
            h[j - 1] = -H[j - 1];
            --j;
        }
        if (j == 0) return c;
        ++h[j - 1];
    }
}

}  // namespace

TEST(Lattice, Oracles) {
    TaylorFrame f(2.5, 2.0);
    auto H = lattice_ranges(f, 1);
    EXPECT_EQ(H, (std::vector<std::int64_t>{1, 2, 2, 4, 5, 8}));
    EXPECT_EQ(lattice_T(f, 1, 2.0), 20513u);
    EXPECT_EQ(lattice_T(TaylorFrame(3.3, 1.5), 1, 2.0), 9135u);
    EXPECT_EQ(lattice_T(TaylorFrame(2.5, 4.0, 3), 2, 4.0), 211u);
    EXPECT_EQ(lattice_T(f, 1, -1.0), 0u);
}

TEST(Lattice, GuardOnLargeFrames) {
    EXPECT_THROW(lattice_T(TaylorFrame(2.5, 16.0), 1, 1.0), guard_error);
}

TEST(Lattice, RangeResolutionMatchesFullEnumeration) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> T(2.05, 3.95), Q(1.2, 3.0), W(0.1, 6.0);
    for (int it = 0; it < 20; ++it) {
        double th = T(rng);
        if (near_integer(th)) th += 0.1;
        int k = 2 + static_cast<int>(rng() % 3);
        TaylorFrame f(th, Q(rng), k);
        int t = 1 + static_cast<int>(rng() % 2);
        double w = W(rng);
        EXPECT_EQ(lattice_T(f, t, w), lattice_full(f, t, w)) << it;
    }
}

TEST(LambdaMoment, UnitWeightsOneVariable) {
    for (double P : {1.0, 7.0, 50.0, 100.0}) {
        std::vector<std::complex<double>> w(100, 1.0);
        EXPECT_EQ(lambda_moment(w, 1, 2.5, P), std::floor(P));
    }
}

TEST(LambdaMoment, MatchesDoubleLoop) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> A(0, 2 * M_PI);
    std::vector<std::complex<double>> w(30);
    for (auto& v : w) v = std::polar(1.0, A(rng));
    const double th = 2.5;
    std::vector<double> S;
    std::vector<std::complex<double>> W;
    for (int a = 1; a <= 30; ++a)
        for (int b = 1; b <= 30; ++b) {
            S.push_back(detail::power(a, th) + detail::power(b, th));
            W.push_back(w[a - 1] * w[b - 1]);
        }
    long double acc = 0;
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = 0; j < S.size(); ++j)
            acc += (W[i] * std::conj(W[j])).real() * lambda_triangle(S[i] - S[j]);
    double got = lambda_moment(w, 2, th, 30);
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(got, static_cast<double>(acc), 1e-8 * std::fabs(static_cast<double>(acc)));
    EXPECT_THROW(lambda_moment(w, 3, th, 30), guard_error);
    EXPECT_THROW(lambda_moment(w, 1, th, 31), validation_error);
}
