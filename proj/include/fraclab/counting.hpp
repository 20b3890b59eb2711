#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fraclab/detail/numeric.hpp"
#include "fraclab/detail/parallel.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/kernels.hpp"

namespace fraclab {

inline constexpr double enumeration_guard = 1e8;
inline constexpr double boundary_flag_width = 1e-9;

// Closed integer interval [lo, hi].
struct IntRange {
    std::int64_t lo;
    std::int64_t hi;
    std::int64_t size() const { return hi >= lo ? hi - lo + 1 : 0; }
};

inline IntRange unit_box(double P) { return {1, detail::floor_int(P)}; }
inline IntRange dyadic_box(double P) { return {detail::floor_int(P) + 1, detail::floor_int(2 * P)}; }

struct CountQuery {
    GeneralizedForm form;
    double P;
    double tau;
    double nu = 0;
};

enum class CountMethod { brute, mitm, tent, lambda_moment };

inline std::string to_string(CountMethod m) {
    switch (m) {
        case CountMethod::brute: return "brute";
        case CountMethod::mitm: return "mitm";
        case CountMethod::tent: return "tent";
        case CountMethod::lambda_moment: return "lambda-moment";
    }
    return "?";
}

struct CountResult {
    std::uint64_t count = 0;
    CountMethod method = CountMethod::brute;
    double elapsed = 0;
    // solutions (or rejected candidates) whose |F - nu| lies within 1e-9 of tau
    std::uint64_t near_boundary = 0;
};

namespace detail {

inline void check_query(const CountQuery& q) {
    require(std::isfinite(q.P) && q.P >= 1, "count needs P >= 1");
    require(std::isfinite(q.tau) && q.tau > 0, "count needs tau > 0");
    require(std::isfinite(q.nu), "nu must be finite");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// terms[i][x-1] = lambda_i x^theta, the exact values evaluate() uses.
inline std::vector<std::vector<double>> term_tables(const GeneralizedForm& form, std::int64_t n) {
    std::vector<std::vector<double>> t(form.s(), std::vector<double>(n));
    for (std::size_t i = 0; i < form.s(); ++i)
        for (std::int64_t x = 1; x <= n; ++x)
            t[i][x - 1] = form.lambdas()[i] * power(static_cast<double>(x), form.theta());
    return t;
}

inline double ipow(double base, std::size_t e) {
    double r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= base;
    return r;
}

inline bool near_edge(double g, double tau) {
    return std::fabs(std::fabs(g) - tau) < boundary_flag_width;
}

// Visits every tuple of dims [1,n]^k (k >= 1) with left-to-right prefix sums; the
// first coordinate is fixed to first+1 so callers can split work on it.
template <class F>
void for_each_tail(const std::vector<const std::vector<double>*>& tabs, std::int64_t first,
                   double start, F&& visit) {
    const std::size_t k = tabs.size();
    const std::int64_t n = static_cast<std::int64_t>(tabs[0]->size());
    std::vector<std::int64_t> idx(k, 0);
    std::vector<double> pre(k);
    idx[0] = first;
    pre[0] = start + (*tabs[0])[first];
    for (std::size_t i = 1; i < k; ++i) pre[i] = pre[i - 1] + (*tabs[i])[0];
    while (true) {
        visit(pre, idx);
        std::size_t i = k - 1;
        while (i >= 1 && idx[i] + 1 == n) --i;
        if (i == 0) return;
        ++idx[i];
        pre[i] = pre[i - 1] + (*tabs[i])[idx[i]];
        for (std::size_t j = i + 1; j < k; ++j) {
            idx[j] = 0;
            pre[j] = pre[j - 1] + (*tabs[j])[0];
        }
    }
}

}  // namespace detail

// Exact count of x in [1, floor P]^s with |F(x) - nu| < tau.
inline CountResult count_brute(const CountQuery& q) {
    detail::check_query(q);
    auto t0 = std::chrono::steady_clock::now();
    const std::int64_t n = detail::floor_int(q.P);
    const std::size_t s = q.form.s();
    double work = detail::ipow(static_cast<double>(n), s);
    if (work > enumeration_guard)
        throw guard_error("brute enumeration of " + std::to_string(work) +
                              " tuples exceeds the 1e8 guard; use count_mitm",
                          work);
    auto tabs = detail::term_tables(q.form, n);
    std::vector<const std::vector<double>*> tp;
    for (auto& t : tabs) tp.push_back(&t);
    std::vector<std::uint64_t> counts(n), edges(n);
    const double L = q.form.shift(), nu = q.nu, tau = q.tau;
    detail::parallel_for(static_cast<std::size_t>(n), [&](std::size_t x) {
        std::uint64_t c = 0, e = 0;
        detail::for_each_tail(tp, static_cast<std::int64_t>(x), 0.0,
                              [&](const std::vector<double>& pre, const auto&) {
                                  double g = (pre.back() - L) - nu;
                                  if (std::fabs(g) < tau) ++c;
                                  if (detail::near_edge(g, tau)) ++e;
                              });
        counts[x] = c;
        edges[x] = e;
    });
    CountResult r;
    r.method = CountMethod::brute;
    r.count = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    r.near_boundary = std::accumulate(edges.begin(), edges.end(), std::uint64_t{0});
    r.elapsed = detail::seconds_since(t0);
    return r;
}

namespace detail {

// Sorted half-sums over the first floor(s/2) coordinates; the other half is
// enumerated and matched against windows of the sorted array.
struct MitmPlan {
    std::int64_t n;
    std::size_t split;
    std::vector<std::vector<double>> tabs;
    std::vector<double> sums;  // sorted ascending (ties by tuple index)
    double margin;

    explicit MitmPlan(const CountQuery& q) {
        check_query(q);
        n = floor_int(q.P);
        const std::size_t s = q.form.s();
        split = s / 2;
        double a_size = ipow(static_cast<double>(n), split);
        double b_size = ipow(static_cast<double>(n), s - split);
        if (b_size > enumeration_guard || a_size > enumeration_guard)
            throw guard_error("meet-in-the-middle needs " + std::to_string(b_size) +
                                  " enumerations, above the 1e8 guard",
                              b_size, 16.0 * a_size);
        tabs = term_tables(q.form, n);
        std::vector<std::pair<double, std::uint64_t>> a;
        a.reserve(static_cast<std::size_t>(a_size));
        if (split == 0) {
            a.push_back({0.0, 0});
        } else {
            std::vector<const std::vector<double>*> tp;
            for (std::size_t i = 0; i < split; ++i) tp.push_back(&tabs[i]);
            for (std::int64_t x = 0; x < n; ++x)
                for_each_tail(tp, x, 0.0, [&](const std::vector<double>& pre, const auto& idx) {
                    std::uint64_t code = 0;
                    for (auto v : idx) code = code * static_cast<std::uint64_t>(n) + v;
                    a.push_back({pre.back(), code});
                });
        }
        std::sort(a.begin(), a.end());
        sums.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) sums[i] = a[i].first;
        double scale = std::fabs(q.form.shift()) + std::fabs(q.nu) + q.tau;
        for (double l : q.form.lambdas())
            scale += std::fabs(l) * power(static_cast<double>(n), q.form.theta());
        margin = 4e-12 * scale + 2 * boundary_flag_width;
    }

    // For each tuple of the second half, visit(b_terms, lo_index, hi_index, inner_lo,
    // inner_hi): entries in [inner_lo, inner_hi) are certainly inside the window;
    // entries in [lo_index, hi_index) outside that range need the canonical check.
    template <class Visit>
    void scan(const CountQuery& q, std::size_t blocks_out, Visit&& visit) const {
        (void)blocks_out;
        const std::size_t s = q.form.s();
        std::vector<const std::vector<double>*> tp;
        for (std::size_t i = split; i < s; ++i) tp.push_back(&tabs[i]);
        const double L = q.form.shift(), nu = q.nu, tau = q.tau, m = margin;
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t x) {
            std::vector<double> bterms(s - split);
            for_each_tail(tp, static_cast<std::int64_t>(x), 0.0,
                          [&](const std::vector<double>& pre, const auto& idx) {
                              for (std::size_t i = 0; i < idx.size(); ++i)
                                  bterms[i] = (*tp[i])[idx[i]];
                              const double c = nu + L - pre.back();
                              const double lo = c - tau, hi = c + tau;
                              auto lb = [&](double v) {
                                  return std::lower_bound(sums.begin(), sums.end(), v) - sums.begin();
                              };
                              auto ub = [&](double v) {
                                  return std::upper_bound(sums.begin(), sums.end(), v) - sums.begin();
                              };
                              std::ptrdiff_t a = lb(lo - m), d = ub(hi + m);
                              if (a >= d) return;
                              std::ptrdiff_t b = ub(lo + m), cc = lb(hi - m);
                              if (b > cc) b = cc = d;  // window narrower than the margins
                              visit(x, bterms, a, d, b, cc);
                          });
        });
    }

    // Canonical F - nu for stored half-sum i followed by the second-half terms.
    double residual(const CountQuery& q, std::size_t i, const std::vector<double>& bterms) const {
        double acc = sums[i];
        for (double t : bterms) acc += t;
        return (acc - q.form.shift()) - q.nu;
    }
};

}  // namespace detail

inline CountResult count_mitm(const CountQuery& q) {
    auto t0 = std::chrono::steady_clock::now();
    detail::MitmPlan plan(q);
    const auto n = static_cast<std::size_t>(plan.n);
    std::vector<std::uint64_t> counts(n), edges(n);
    plan.scan(q, n, [&](std::size_t blk, const std::vector<double>& bt, std::ptrdiff_t a,
                        std::ptrdiff_t d, std::ptrdiff_t b, std::ptrdiff_t c) {
        std::uint64_t cnt = static_cast<std::uint64_t>(c - b), e = 0;
        auto check = [&](std::ptrdiff_t i) {
            double g = plan.residual(q, static_cast<std::size_t>(i), bt);
            if (std::fabs(g) < q.tau) ++cnt;
            if (detail::near_edge(g, q.tau)) ++e;
        };
        for (std::ptrdiff_t i = a; i < b; ++i) check(i);
        for (std::ptrdiff_t i = c; i < d; ++i) check(i);
        counts[blk] += cnt;
        edges[blk] += e;
    });
    CountResult r;
    r.method = CountMethod::mitm;
    r.count = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    r.near_boundary = std::accumulate(edges.begin(), edges.end(), std::uint64_t{0});
    r.elapsed = detail::seconds_since(t0);
    return r;
}

// sum_x max(0, 1 - |F(x) - nu| / tau): the tent-weighted count.
inline double tent_count(const CountQuery& q) {
    detail::MitmPlan plan(q);
    const auto n = static_cast<std::size_t>(plan.n);
    std::vector<long double> part(n);
    plan.scan(q, n, [&](std::size_t blk, const std::vector<double>& bt, std::ptrdiff_t a,
                        std::ptrdiff_t d, std::ptrdiff_t, std::ptrdiff_t) {
        for (std::ptrdiff_t i = a; i < d; ++i) {
            double g = plan.residual(q, static_cast<std::size_t>(i), bt);
            if (std::fabs(g) < q.tau) part[blk] += 1.0 - std::fabs(g) / q.tau;
        }
    });
    long double total = 0;
    for (auto v : part) total += v;
    return static_cast<double>(total);
}

namespace detail {

// Sorted multiset of sum_{i<=t} x_i^theta with x_1 in I1 and the rest in I2.
inline std::vector<double> vt_half_sums(double theta, int t, IntRange I1, IntRange I2) {
    std::vector<double> p1, p2;
    for (auto x = I1.lo; x <= I1.hi; ++x) p1.push_back(power(static_cast<double>(x), theta));
    for (auto x = I2.lo; x <= I2.hi; ++x) p2.push_back(power(static_cast<double>(x), theta));
    std::vector<double> out;
    if (p1.empty() || (t > 1 && p2.empty())) return out;
    std::vector<const std::vector<double>*> tp{&p1};
    for (int i = 1; i < t; ++i) tp.push_back(&p2);
    // for_each_tail assumes equal table lengths, so pad logic is done by hand here.
    std::vector<std::size_t> idx(t, 0);
    std::vector<double> pre(t);
    auto len = [&](int i) { return tp[i]->size(); };
    pre[0] = (*tp[0])[0];
    for (int i = 1; i < t; ++i) pre[i] = pre[i - 1] + (*tp[i])[0];
    while (true) {
        out.push_back(pre[t - 1]);
        int i = t - 1;
        while (i >= 0 && idx[i] + 1 == len(i)) --i;
        if (i < 0) break;
        ++idx[i];
        pre[i] = (i ? pre[i - 1] : 0.0) + (*tp[i])[idx[i]];
        for (int j = i + 1; j < t; ++j) {
            idx[j] = 0;
            pre[j] = pre[j - 1] + (*tp[j])[0];
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Solutions of |sum_{i<=t} x_i^theta - sum_{i<=t} x_{t+i}^theta| < delta with
// x_1, x_{t+1} in I1 and the other variables in I2.
inline std::uint64_t count_Vt(double theta, int t, IntRange I1, IntRange I2, double delta) {
    check_theta(theta);
    require(t >= 1, "t must be >= 1");
    require(delta > 0, "delta must be positive");
    double half = static_cast<double>(I1.size()) * detail::ipow(static_cast<double>(I2.size()), t - 1);
    if (half > enumeration_guard)
        throw guard_error("V_t half enumeration exceeds the 1e8 guard", half, 8 * half);
    auto v = detail::vt_half_sums(theta, t, I1, I2);
    std::uint64_t total = 0;
    for (double u : v) {
        auto lo = std::partition_point(v.begin(), v.end(), [&](double w) { return u - w >= delta; });
        auto hi = std::partition_point(lo, v.end(), [&](double w) { return w - u < delta; });
        total += static_cast<std::uint64_t>(hi - lo);
    }
    return total;
}

// Solutions of sum_{i<=t} (y_i^j - y_{t+i}^j) = h_j for 1 <= j <= k, y in [1, Y].
inline std::uint64_t vinogradov_J(int t, int k, std::int64_t Y, const std::vector<std::int64_t>& h) {
    require(t >= 1 && k >= 1 && Y >= 1, "vinogradov_J needs t, k, Y >= 1");
    require(h.size() == static_cast<std::size_t>(k), "h must have length k");
    double half = detail::ipow(static_cast<double>(Y), t);
    if (half > enumeration_guard)
        throw guard_error("Vinogradov half enumeration exceeds the 1e8 guard", half, 8.0 * half * k);
    // power sums up to t*Y^k must fit comfortably in 63 bits
    __int128 top = t;
    for (int j = 0; j < k; ++j) {
        top *= Y;
        if (top > (__int128(1) << 61))
            throw guard_error("power sums overflow 64-bit integers", static_cast<double>(k), 0);
    }
    for (int j = 0; j < k; ++j) {
        __int128 cap = t;
        for (int i = 0; i <= j; ++i) cap *= Y;
        if (h[j] > cap || -h[j] > cap) return 0;
    }
    std::vector<std::int64_t> pw(static_cast<std::size_t>(Y + 1) * k);
    for (std::int64_t y = 1; y <= Y; ++y) {
        std::int64_t v = 1;
        for (int j = 0; j < k; ++j) {
            v *= y;
            pw[y * k + j] = v;
        }
    }
    const std::size_t M = static_cast<std::size_t>(half);
    std::vector<std::int64_t> vec(M * k, 0);
    std::vector<std::int64_t> y(t, 1);
    for (std::size_t m = 0; m < M; ++m) {
        for (int i = 0; i < t; ++i)
            for (int j = 0; j < k; ++j) vec[m * k + j] += pw[y[i] * k + j];
        for (int i = t - 1; i >= 0; --i) {
            if (++y[i] <= Y) break;
            y[i] = 1;
        }
    }
    std::vector<std::uint32_t> order(M);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::uint32_t a, std::uint32_t b) {
        return std::lexicographical_compare(&vec[a * k], &vec[a * k] + k, &vec[b * k], &vec[b * k] + k);
    };
    std::sort(order.begin(), order.end(), less);
    // distinct vectors with multiplicities
    std::vector<std::int64_t> keys;
    std::vector<std::uint64_t> mult;
    for (std::size_t i = 0; i < M; ++i) {
        const std::int64_t* v = &vec[order[i] * k];
        if (!keys.empty() && std::equal(v, v + k, keys.end() - k)) {
            ++mult.back();
        } else {
            keys.insert(keys.end(), v, v + k);
            mult.push_back(1);
        }
    }
    const std::size_t D = mult.size();
    std::vector<std::int64_t> target(k);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < D; ++i) {
        for (int j = 0; j < k; ++j) target[j] = keys[i * k + j] - h[j];
        std::size_t lo = 0, hi = D;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (std::lexicographical_compare(&keys[mid * k], &keys[mid * k] + k, target.begin(),
                                             target.end()))
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < D && std::equal(target.begin(), target.end(), &keys[lo * k]))
            total += mult[i] * mult[lo];
    }
    return total;
}

inline std::vector<std::int64_t> lattice_ranges(const TaylorFrame& f, int t) {
    std::vector<std::int64_t> H;
    for (int j = 1; j <= f.k(); ++j)
        H.push_back(static_cast<std::int64_t>(std::floor(t * std::pow(f.base(), 0.5 * j))));
    return H;
}

// Integer h with |h_j| <= t Q^{j/2} and |H(h)| <= window; h_1 resolved in closed form.
inline std::uint64_t lattice_T(const TaylorFrame& f, int t, double window) {
    require(t >= 1, "t must be >= 1");
    if (window < 0) return 0;
    const int k = f.k();
    auto H = lattice_ranges(f, t);
    double work = 1;
    for (int j = 1; j < k; ++j) work *= 2.0 * H[j] + 1;
    if (work > enumeration_guard)
        throw guard_error("lattice enumeration of h_2..h_k exceeds the 1e8 guard", work);
    const double c1 = f.scaled()[0];
    std::vector<std::int64_t> h(k, 0);
    for (int j = 1; j < k; ++j) h[j] = -H[j];
    auto inside = [&](std::int64_t h1) {
        h[0] = h1;
        return std::fabs(h_linear_form(f, h)) <= window;
    };
    std::uint64_t total = 0;
    while (true) {
        double rest = 0;
        for (int j = 1; j < k; ++j) rest += f.scaled()[j] * static_cast<double>(h[j]);
        double flo = std::ceil((-window - rest) / c1), fhi = std::floor((window - rest) / c1);
        std::int64_t lo = static_cast<std::int64_t>(std::max(flo, static_cast<double>(-H[0])));
        std::int64_t hi = static_cast<std::int64_t>(std::min(fhi, static_cast<double>(H[0])));
        if (lo <= hi + 1) {
            while (lo - 1 >= -H[0] && inside(lo - 1)) --lo;
            while (lo <= hi && !inside(lo)) ++lo;
            while (hi + 1 <= H[0] && inside(hi + 1)) ++hi;
            while (hi >= lo && !inside(hi)) --hi;
            if (hi >= lo) total += static_cast<std::uint64_t>(hi - lo + 1);
        }
        int j = k - 1;
        while (j >= 1 && h[j] == H[j]) {
            h[j] = -H[j];
            --j;
        }
        if (j < 1) break;
        ++h[j];
    }
    return total;
}

// sum_{x,y in [1,P]^s} prod a_{x_i} conj(prod a_{y_i}) Lambda(sum x^theta - sum y^theta)
inline double lambda_moment(const std::vector<std::complex<double>>& weights, int s, double theta,
                            double P) {
    check_theta(theta);
    require(s >= 1 && P >= 1, "lambda_moment needs s >= 1, P >= 1");
    const auto n = detail::floor_int(P);
    require(static_cast<std::int64_t>(weights.size()) >= n, "weight sequence shorter than floor(P)");
    double half = detail::ipow(static_cast<double>(n), s);
    if (half > 1e4) throw guard_error("lambda_moment half enumeration exceeds the 1e4 guard", half);
    std::vector<double> pw(n);
    for (std::int64_t x = 1; x <= n; ++x) pw[x - 1] = detail::power(static_cast<double>(x), theta);
    struct Entry {
        double S;
        std::complex<double> W;
        std::size_t code;
    };
    std::vector<Entry> e;
    std::vector<std::int64_t> idx(s, 0);
    for (std::size_t code = 0; code < static_cast<std::size_t>(half); ++code) {
        double S = 0;
        std::complex<double> W = 1;
        for (int i = 0; i < s; ++i) {
            S += pw[idx[i]];
            W *= weights[idx[i]];
        }
        e.push_back({S, W, code});
        for (int i = s - 1; i >= 0; --i) {
            if (++idx[i] < n) break;
            idx[i] = 0;
        }
    }
    std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) {
        return a.S < b.S || (a.S == b.S && a.code < b.code);
    });
    long double total = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        total += std::norm(e[i].W);
        for (std::size_t j = i + 1; j < e.size() && e[j].S - e[i].S < 1.0; ++j)
            total += 2.0L * (e[i].W * std::conj(e[j].W)).real() * lambda_triangle(e[i].S - e[j].S);
    }
    return static_cast<double>(total);
}

}  // namespace fraclab
