#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fraclab.hpp"

namespace fraclab::cli {

using json = nlohmann::json;

inline constexpr const char* artifact_version = "fraclab-0.3.0";

// ---- parameter parsing ----------------------------------------------------

inline double parse_number(std::string tok) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    double sign = 1;
    if (!tok.empty() && (tok[0] == '-' || tok[0] == '+')) {
        if (tok[0] == '-') sign = -1;
        tok.erase(0, 1);
    }
    static const std::map<std::string, double> named{{"sqrt2", std::sqrt(2.0)},
                                                     {"sqrt3", std::sqrt(3.0)},
                                                     {"sqrt5", std::sqrt(5.0)},
                                                     {"pi", std::numbers::pi},
                                                     {"e", std::numbers::e}};
    if (auto it = named.find(tok); it != named.end()) return sign * it->second;
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (tok.empty() || used != tok.size() || !std::isfinite(v))
        throw validation_error("cannot parse number '" + tok + "'");
    return sign * v;
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_number(tok));
    if (out.empty()) throw validation_error("empty list");
    return out;
}

inline std::int64_t as_integer(double v, const std::string& what) {
    require(std::nearbyint(v) == v && std::fabs(v) < 9e15, what + " must be an integer");
    return static_cast<std::int64_t>(v);
}

// %.15g with -0 folded into 0: the canonical text of a number in cache keys.
inline std::string canonical(double v) {
    if (v == 0) v = 0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline std::string sha256_hex(const std::string& text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

// Digest of the command, its numeric parameters (sorted by name) and the artifact version.
inline std::string cache_key(const std::string& command,
                             const std::map<std::string, std::vector<double>>& numbers,
                             const std::map<std::string, std::string>& tags,
                             const std::string& version = artifact_version) {
    std::string text = version + "\n" + command + "\n";
    for (const auto& [name, vals] : numbers) {
        text += name + "=";
        for (std::size_t i = 0; i < vals.size(); ++i) text += (i ? "," : "") + canonical(vals[i]);
        text += "\n";
    }
    for (const auto& [name, v] : tags) text += name + ":" + v + "\n";
    return sha256_hex(text);
}

inline std::string count_key(const CountQuery& q, CountMethod m,
                             const std::string& version = artifact_version) {
    return cache_key("count",
                     {{"theta", {q.form.theta()}},
                      {"lambda", q.form.lambdas()},
                      {"shift", {q.form.shift()}},
                      {"P", {q.P}},
                      {"tau", {q.tau}},
                      {"nu", {q.nu}}},
                     {{"method", to_string(m)}}, version);
}

// ---- result cache ----------------------------------------------------------

// Append-only JSON-lines file; flock keeps concurrent writers from interleaving.
class CountCache {
public:
    explicit CountCache(std::string path) : path_(std::move(path)) {}

    std::optional<CountResult> lookup(const std::string& key) const {
        int fd = ::open(path_.c_str(), O_RDONLY);
        if (fd < 0) return std::nullopt;
        ::flock(fd, LOCK_SH);
        std::optional<CountResult> hit;
        std::ifstream in(path_);
        std::string line;
        for (int n = 1; std::getline(in, line); ++n) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("key") || !j.contains("count")) {
                std::cerr << "warning: skipping corrupt cache line " << n << " in " << path_ << "\n";
                continue;
            }
            if (j["key"] != key) continue;
            try {
                CountResult r;
                r.count = j.at("count").get<std::uint64_t>();
                r.method = j.at("method") == "brute" ? CountMethod::brute : CountMethod::mitm;
                r.near_boundary = j.at("near_boundary").get<std::uint64_t>();
                r.elapsed = j.at("elapsed").get<double>();
                hit = r;
            } catch (const json::exception&) {
                std::cerr << "warning: skipping corrupt cache line " << n << " in " << path_ << "\n";
            }
        }
        ::flock(fd, LOCK_UN);
        ::close(fd);
        return hit;
    }

    void store(const std::string& key, const CountResult& r, const json& params) const {
        int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
        if (fd < 0) throw validation_error("cache path '" + path_ + "' is not writable");
        ::flock(fd, LOCK_EX);
        json j{{"key", key},
               {"version", artifact_version},
               {"count", r.count},
               {"method", to_string(r.method)},
               {"near_boundary", r.near_boundary},
               {"elapsed", r.elapsed},
               {"params", params}};
        std::string line = j.dump() + "\n";
        ssize_t done = ::write(fd, line.data(), line.size());
        ::flock(fd, LOCK_UN);
        ::close(fd);
        if (done != static_cast<ssize_t>(line.size()))
            throw validation_error("short write to cache '" + path_ + "'");
    }

private:
    std::string path_;
};

// ---- options ---------------------------------------------------------------

struct Options {
    std::string out, format = "json", cache;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool paper_exact_omega = false;

    double theta = std::nan("");
    std::string lambda, p, nu = "0", y, h;
    double shift = 0, tau = 1, alpha = 0, kappa = 1, eps = 1e-2, tail_target = 0.05;
    std::string method, kind = "f", range = "unit", quantity = "count", suite = "all";
    bool definite = false, exclude_band = false;
    int s = 0, t = 2, k = 2, kernel_h = 2, points = 400, grid = 1000;
    std::uint64_t budget = 1000000;
    double target = 1e-6, phase_scale = 0.25;
    std::size_t max_panels = std::size_t(1) << 24;
};

inline QuadratureSpec quad_spec(const Options& o) {
    require(o.target > 0 && o.phase_scale > 0 && o.max_panels >= 1, "bad quadrature settings");
    return {o.target, o.max_panels, o.phase_scale};
}

inline json quad_json(const QuadratureSpec& q) {
    return {{"target_abs_error", q.target_abs_error},
            {"max_panels", q.max_panels},
            {"phase_scale", q.phase_scale}};
}

inline double need(double v, const char* flag) {
    if (std::isnan(v)) throw validation_error(std::string("missing ") + flag);
    return v;
}

inline const std::string& need(const std::string& v, const char* flag) {
    if (v.empty()) throw validation_error(std::string("missing ") + flag);
    return v;
}

inline GeneralizedForm form_of(const Options& o) {
    return GeneralizedForm(need(o.theta, "--theta"), parse_list(need(o.lambda, "--lambda")), o.shift);
}

inline json form_json(const GeneralizedForm& f) {
    return {{"theta", f.theta()}, {"lambda", f.lambdas()}, {"shift", f.shift()}};
}

inline double single(const std::string& text, const char* flag) {
    auto v = parse_list(need(text, flag));
    require(v.size() == 1, std::string(flag) + " takes one value here");
    return v[0];
}

inline OmegaMethod omega_method(const std::string& m) {
    if (m.empty() || m == "nested-quadrature" || m == "quadrature") return OmegaMethod::nested_quadrature;
    if (m == "monte-carlo" || m == "mc") return OmegaMethod::monte_carlo;
    if (m == "volume-oracle" || m == "volume") return OmegaMethod::volume_oracle;
    throw validation_error("unknown omega method '" + m + "'");
}

// ---- reports ---------------------------------------------------------------

struct Report {
    std::string command;
    json params = json::object();
    json result = json::object();
    std::optional<double> error_estimate;
    json provenance = json::object();
    std::vector<json> rows;  // sweep rows; empty for single-shot commands
    int exit_code = 0;

    json to_json() const {
        json j{{"command", command}, {"params", params}, {"result", result}, {"provenance", provenance}};
        if (error_estimate) j["error_estimate"] = *error_estimate;
        return j;
    }
};

inline std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    return v.dump();
}

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> c{"scale",  "measured", "predicted",     "ratio",
                                            "method", "elapsed",  "error_estimate"};
    return c;
}

inline std::string to_csv(const Report& r) {
    std::ostringstream out;
    out << "# provenance " << r.provenance.dump() << "\n";
    if (!r.rows.empty()) {
        const auto& cols = sweep_columns();
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
        out << "\n";
        for (const auto& row : r.rows) {
            for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_cell(row.value(cols[i], json()));
            out << "\n";
        }
        if (r.result.contains("fit")) out << "# fit " << r.result["fit"].dump() << "\n";
        return out.str();
    }
    std::vector<std::string> keys;
    for (auto it = r.result.begin(); it != r.result.end(); ++it)
        if (!it.value().is_structured()) keys.push_back(it.key());
    if (r.error_estimate) keys.push_back("error_estimate");
    for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
    out << "\n";
    for (std::size_t i = 0; i < keys.size(); ++i)
        out << (i ? "," : "")
            << (keys[i] == "error_estimate" && !r.result.contains("error_estimate")
                    ? csv_cell(json(*r.error_estimate))
                    : csv_cell(r.result[keys[i]]));
    out << "\n";
    return out.str();
}

inline void emit(const Options& o, const Report& r) {
    std::string text = o.format == "csv" ? to_csv(r) : r.to_json().dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) throw validation_error("cannot write output file '" + o.out + "'");
    f << text;
}

// ---- commands ----------------------------------------------------------------

inline CountResult cached_count(const Options& o, const CountQuery& q, CountMethod m, Report& r) {
    const std::string path = o.cache;
    auto run = [&] { return m == CountMethod::brute ? count_brute(q) : count_mitm(q); };
    if (path.empty()) {
        r.provenance["cache"] = "off";
        return run();
    }
    CountCache cache(path);
    const std::string key = count_key(q, m);
    r.provenance["cache_key"] = key;
    if (auto hit = cache.lookup(key)) {
        r.provenance["cache"] = "hit";
        return *hit;
    }
    auto res = run();
    cache.store(key, res, {{"form", form_json(q.form)}, {"P", q.P}, {"tau", q.tau}, {"nu", q.nu}});
    r.provenance["cache"] = "miss";
    return res;
}

inline void cmd_count(const Options& o, Report& r) {
    auto f = form_of(o);
    CountQuery q{f, single(o.p, "--p"), o.tau, single(o.nu, "--nu")};
    const std::string m = o.method.empty() ? "mitm" : o.method;
    r.params = {{"form", form_json(f)}, {"P", q.P}, {"tau", q.tau}, {"nu", q.nu}, {"method", m}};
    if (f.hypothesis_warning()) r.provenance["warning"] = "theta <= 2 lies outside the asymptotic hypotheses";
    if (m == "brute" || m == "mitm") {
        auto res = cached_count(o, q, m == "brute" ? CountMethod::brute : CountMethod::mitm, r);
        r.result = {{"count", res.count},
                    {"method", to_string(res.method)},
                    {"near_boundary", res.near_boundary},
                    {"elapsed", res.elapsed}};
    } else if (m == "tent") {
        r.result = {{"tent_count", tent_count(q)}, {"method", "tent"}};
    } else if (m == "lambda-moment") {
        std::vector<std::complex<double>> w(static_cast<std::size_t>(std::floor(q.P)), 1.0);
        r.result = {{"value", lambda_moment(w, static_cast<int>(f.s()), f.theta(), q.P)},
                    {"method", "lambda-moment"}};
    } else {
        throw validation_error("unknown count method '" + m + "'");
    }
}

inline void cmd_predict(const Options& o, Report& r) {
    auto lam = parse_list(need(o.lambda, "--lambda"));
    const double theta = need(o.theta, "--theta");
    const int s = o.s ? o.s : static_cast<int>(lam.size());
    require(static_cast<std::size_t>(s) == lam.size(), "--s must equal the number of coefficients");
    if (o.definite) {
        const double nu = single(o.nu, "--nu");
        double c = definite_constant(s, theta, lam);
        r.params = {{"definite", true}, {"s", s}, {"theta", theta}, {"lambda", lam}, {"tau", o.tau}, {"nu", nu}};
        r.result = {{"predicted", predict_definite(s, theta, lam, o.tau, nu)}, {"constant", c}};
        return;
    }
    GeneralizedForm f(theta, lam, o.shift);
    CountQuery q{f, single(o.p, "--p"), o.tau, 0.0};
    auto om = omega_constant(s, theta, lam, omega_method(o.method), o.budget, o.seed);
    r.params = {{"definite", false}, {"form", form_json(f)}, {"P", q.P}, {"tau", o.tau},
                {"omega_method", to_string(om.method)}};
    r.result = {{"predicted", predict(q, om.value)}, {"omega", om.value}};
    if (om.std_error > 0) r.error_estimate = predict(q, om.std_error);
}

inline void cmd_omega(const Options& o, Report& r) {
    auto lam = parse_list(need(o.lambda, "--lambda"));
    const double theta = need(o.theta, "--theta");
    const int s = o.s ? o.s : static_cast<int>(lam.size());
    auto m = omega_method(o.method);
    OmegaEstimate est = m == OmegaMethod::volume_oracle
                            ? omega_volume_oracle(s, theta, lam, o.eps, o.budget, o.seed)
                            : omega_constant(s, theta, lam, m, o.budget, o.seed);
    r.params = {{"s", s}, {"theta", theta}, {"lambda", lam}, {"method", to_string(m)}, {"budget", o.budget}};
    if (m == OmegaMethod::volume_oracle) r.params["eps"] = o.eps;
    r.result = {{"omega", est.value}, {"std_error", est.std_error}, {"method", to_string(est.method)}};
    if (est.std_error > 0) r.error_estimate = est.std_error;
}

inline void cmd_expsum(const Options& o, Report& r) {
    const double theta = need(o.theta, "--theta"), P = single(o.p, "--p");
    const double lam = o.lambda.empty() ? 1.0 : single(o.lambda, "--lambda");
    cplx v;
    if (o.kind == "f") {
        v = f_sum(theta, lam * o.alpha, P);
    } else if (o.kind == "g") {
        v = g_sum(theta, lam * o.alpha, P);
    } else if (o.kind == "upsilon") {
        double err = 0;
        v = upsilon(theta, lam, o.alpha, P, &err);
        r.error_estimate = err;
    } else {
        throw validation_error("unknown --kind '" + o.kind + "' (f, g, upsilon)");
    }
    r.params = {{"theta", theta}, {"lambda", lam}, {"alpha", o.alpha}, {"P", P}, {"kind", o.kind}};
    r.result = {{"re", v.real()}, {"im", v.imag()}, {"abs", std::abs(v)}};
}

inline void cmd_meanvalue(const Options& o, Report& r) {
    const double theta = need(o.theta, "--theta"), P = single(o.p, "--p");
    require(P >= 1, "meanvalue needs P >= 1");
    auto spec = quad_spec(o);
    IntRange I = o.range == "dyadic" ? dyadic_box(P) : unit_box(P);
    require(o.range == "unit" || o.range == "dyadic", "--range must be unit or dyadic");
    auto est = mean_value_range(theta, o.t, o.kappa, I, spec);
    r.params = {{"theta", theta}, {"t", o.t}, {"kappa", o.kappa}, {"P", P}, {"range", o.range}};
    r.provenance["quadrature"] = quad_json(spec);
    r.result = {{"value", est.value}, {"panels", est.panels}};
    r.error_estimate = est.error;
}

inline void cmd_kernel_check(const Options& o, Report& r) {
    const double P = single(o.p, "--p");
    require(o.points >= 2, "--points must be >= 2");
    auto kp = make_kernel_pair(o.tau, P, o.kernel_h);
    std::uint64_t sandwich = 0, decay = 0, checked = 0;
    for (int i = 0; i < o.points; ++i) {
        double xi = -3 * o.tau + 6 * o.tau * i / (o.points - 1);
        if (o.exclude_band && std::fabs(std::fabs(xi) - o.tau) <= kp.tau_tilde) continue;
        ++checked;
        double chi = chi_tau(xi, o.tau);
        if (!(freeman_psi(kp.minus, xi) <= chi && chi <= freeman_psi(kp.plus, xi))) ++sandwich;
        double alpha = 40.0 * i / (o.points - 1);
        for (const auto* K : {&kp.minus, &kp.plus})
            if (std::fabs(freeman_eval(*K, alpha)) > freeman_decay_bound(*K, alpha) * (1 + 1e-12)) ++decay;
    }
    r.params = {{"tau", o.tau}, {"P", P}, {"h", o.kernel_h}, {"points", o.points}, {"exclude_band", o.exclude_band}};
    r.result = {{"checked", checked},
                {"sandwich_violations", sandwich},
                {"decay_violations", decay},
                {"tau_tilde", kp.tau_tilde}};
}

inline void cmd_vinogradov(const Options& o, Report& r) {
    const auto Y = as_integer(single(o.y, "--y"), "--y");
    std::vector<std::int64_t> h(o.k, 0);
    if (!o.h.empty()) {
        auto v = parse_list(o.h);
        require(v.size() == static_cast<std::size_t>(o.k), "--h must have k entries");
        for (int j = 0; j < o.k; ++j) h[j] = as_integer(v[j], "--h");
    }
    r.params = {{"t", o.t}, {"k", o.k}, {"Y", Y}, {"h", h}};
    r.result = {{"J", vinogradov_J(o.t, o.k, Y, h)}};
}

inline json sweep_row(double scale, double measured, double predicted, const std::string& method,
                      double elapsed, std::optional<double> err = std::nullopt) {
    json row{{"scale", scale}, {"measured", measured}, {"method", method}, {"elapsed", elapsed}};
    row["predicted"] = std::isfinite(predicted) ? json(predicted) : json();
    row["ratio"] = std::isfinite(predicted) && predicted != 0 ? json(measured / predicted) : json();
    row["error_estimate"] = err ? json(*err) : json();
    return row;
}

inline void cmd_sweep(const Options& o, Report& r) {
    const std::string& q = o.quantity;
    std::vector<double> scales;
    if (q == "definite") scales = parse_list(need(o.nu, "--nu"));
    else if (q == "vinogradov") scales = parse_list(need(o.y, "--y"));
    else scales = parse_list(need(o.p, "--p"));
    std::sort(scales.begin(), scales.end());
    r.params = {{"quantity", q}, {"scales", scales}, {"tau", o.tau}};
    auto spec = quad_spec(o);
    ArcOverrides ov;
    ov.paper_exact_omega = o.paper_exact_omega;
    std::optional<double> omega;
    auto omega_for = [&](const GeneralizedForm& f) -> double {
        if (!f.indefinite() || static_cast<double>(f.s()) <= f.theta()) return std::nan("");
        if (!omega) omega = omega_constant(static_cast<int>(f.s()), f.theta(), f.lambdas(),
                                           omega_method(o.method), o.budget, o.seed).value;
        return *omega;
    };
    for (double x : scales) {
        auto t0 = std::chrono::steady_clock::now();
        if (q == "count") {
            auto f = form_of(o);
            r.params["form"] = form_json(f);
            CountQuery cq{f, x, o.tau, 0.0};
            auto res = cached_count(o, cq, CountMethod::mitm, r);
            double om = omega_for(f);
            r.rows.push_back(sweep_row(x, static_cast<double>(res.count),
                                       std::isnan(om) ? om : predict(cq, om), "mitm",
                                       detail::seconds_since(t0)));
        } else if (q == "definite") {
            auto f = form_of(o);
            require(!f.indefinite() && f.lambdas()[0] > 0, "definite sweep needs positive coefficients");
            r.params["form"] = form_json(f);
            CountQuery cq{f, definite_box(f.theta(), f.lambdas(), x), o.tau, x};
            auto res = cached_count(o, cq, CountMethod::mitm, r);
            r.rows.push_back(sweep_row(x, static_cast<double>(res.count),
                                       predict_definite(static_cast<int>(f.s()), f.theta(), f.lambdas(), o.tau, x),
                                       "mitm", detail::seconds_since(t0)));
        } else if (q == "meanvalue") {
            const double theta = need(o.theta, "--theta");
            r.params["theta"] = theta;
            r.params["t"] = o.t;
            r.params["kappa"] = o.kappa;
            auto est = mean_value(theta, o.t, o.kappa, x, spec);
            r.rows.push_back(sweep_row(x, est.value, std::nan(""), "quadrature", detail::seconds_since(t0), est.error));
        } else if (q == "minor-arc") {
            auto f = form_of(o);
            r.params["form"] = form_json(f);
            r.params["grid"] = o.grid;
            auto sup = minor_arc_sup(f, x, dissect(f.theta(), x, ov), o.grid);
            r.rows.push_back(sweep_row(x, sup.sup_abs, std::pow(x, 1 - std::pow(4.0, -f.theta())), "grid+brent",
                                       detail::seconds_since(t0)));
        } else if (q == "vinogradov") {
            auto Y = as_integer(x, "--y");
            r.params["t"] = o.t;
            r.params["k"] = o.k;
            double J = static_cast<double>(vinogradov_J(o.t, o.k, Y, std::vector<std::int64_t>(o.k, 0)));
            r.rows.push_back(sweep_row(x, J, std::pow(x, o.t), "mitm", detail::seconds_since(t0)));
        } else if (q == "pipeline") {
            auto f = form_of(o);
            r.params["form"] = form_json(f);
            r.params["h"] = o.kernel_h;
            r.params["tail_target"] = o.tail_target;
            double om = omega_for(f);
            auto row = pipeline_report(f, x, o.tau, o.kernel_h, spec, o.tail_target, ov,
                                       std::isnan(om) ? std::nullopt : std::optional<double>(om));
            auto j = sweep_row(x, static_cast<double>(row.N), row.predicted, "pipeline",
                               detail::seconds_since(t0), std::max(row.minus.error, row.plus.error));
            j["r_minus"] = row.minus.total;
            j["r_plus"] = row.plus.total;
            j["sandwich_ok"] = row.sandwich_ok;
            j["trivial_ok"] = row.trivial_ok;
            r.rows.push_back(j);
        } else {
            throw validation_error("unknown --quantity '" + q +
                                   "' (count, definite, meanvalue, minor-arc, vinogradov, pipeline)");
        }
    }
    if (q == "meanvalue" || q == "pipeline") r.provenance["quadrature"] = quad_json(spec);
    r.result["rows"] = r.rows;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : r.rows)
        if (row["measured"].get<double>() > 0) pts.push_back({row["scale"].get<double>(), row["measured"].get<double>()});
    if (pts.size() >= 3) {
        auto fit = fit_exponent(pts);
        r.result["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
    } else {
        r.result["fit"] = nullptr;
    }
}

inline void cmd_verify(const Options& o, Report& r) {
    const std::string& suite = o.suite;
    require(suite == "all" || suite == "sandwich" || suite == "taylor" || suite == "mitm",
            "--suite must be sandwich, taylor, mitm or all");
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> U(0, 1);
    std::uint64_t checks = 0;
    json failures = json::array();
    auto random_query = [&](int max_s, double max_P) {
        int s = 1 + static_cast<int>(rng() % max_s);
        double theta = 2.05 + 2.9 * U(rng);
        if (near_integer(theta)) theta += 0.1;
        std::vector<double> lam;
        for (int i = 0; i < s; ++i) lam.push_back((0.2 + 2.8 * U(rng)) * (U(rng) < 0.5 ? -1 : 1));
        double P = 1 + U(rng) * (std::pow(max_P, std::min(1.0, 4.0 / s)) - 1);
        return CountQuery{GeneralizedForm(theta, lam), P, 0.05 + 3 * U(rng), 0.0};
    };
    if (suite == "all" || suite == "sandwich") {
        for (double tau : {0.5, 1.0})
            for (double P : {50.0, 500.0, 5000.0}) {
                auto kp = make_kernel_pair(tau, P);
                for (int i = 0; i < 400; ++i) {
                    double xi = -3 * tau + 6 * tau * i / 399.0, chi = chi_tau(xi, tau);
                    ++checks;
                    if (!(freeman_psi(kp.minus, xi) <= chi && chi <= freeman_psi(kp.plus, xi)))
                        failures.push_back({{"check", "kernel"}, {"tau", tau}, {"P", P}, {"xi", xi}});
                }
            }
        for (int i = 0; i < 30; ++i) {
            auto q = random_query(4, 30);
            CountQuery q2 = q;
            q2.tau *= 2;
            double c = static_cast<double>(count_mitm(q).count);
            ++checks;
            if (!(tent_count(q) <= c && c <= 2 * tent_count(q2)))
                failures.push_back({{"check", "tent"}, {"index", i}});
        }
    }
    if (suite == "all" || suite == "taylor") {
        for (int i = 0; i < 1000; ++i) {
            double th = 2 + 3 * U(rng);
            if (near_integer(th)) continue;
            double z = 0.95 * U(rng);
            TaylorFrame f(th, 1.0);
            long double truth = std::fabs(std::pow(1.0L + z, static_cast<long double>(th)) -
                                          static_cast<long double>(taylor_polynomial(f, z)));
            ++checks;
            // double rounding of the polynomial is allowed on top of the bound
            if (truth > remainder_bound(f, z) + 8 * std::numeric_limits<double>::epsilon() * std::pow(1 + z, th))
                failures.push_back({{"check", "taylor"}, {"theta", th}, {"z", z}});
        }
    }
    if (suite == "all" || suite == "mitm") {
        for (int i = 0; i < 50; ++i) {
            auto q = random_query(5, 30);
            ++checks;
            if (count_brute(q).count != count_mitm(q).count) failures.push_back({{"check", "mitm"}, {"index", i}});
        }
    }
    r.params = {{"suite", suite}, {"seed", o.seed}};
    r.result = {{"checks", checks}, {"failures", failures.size()}, {"failed", failures}};
    if (!failures.empty()) r.exit_code = 1;
}

// ---- driver ----------------------------------------------------------------------

inline json error_json(const std::string& type, const std::string& message) {
    return {{"error", {{"type", type}, {"message", message}}}};
}

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Counting, kernels and asymptotics for fractional-degree diagonal forms", "fraclab"};
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    if (const char* env = std::getenv("FRACLAB_CACHE")) o.cache = env;

    app.add_option("--out", o.out, "write the report here instead of stdout");
    app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--cache", o.cache, "JSON-lines count cache (default $FRACLAB_CACHE)");
    app.add_option("--seed", o.seed);
    app.add_option("--threads", o.threads);
    app.add_flag("--paper-exact-omega", o.paper_exact_omega, "use omega = 5^{-100 theta} for the arcs");

    auto form_opts = [&](CLI::App* c) {
        c->add_option("--theta", o.theta);
        c->add_option("--lambda", o.lambda, "comma list; tokens sqrt2 sqrt3 sqrt5 pi e allowed");
        c->add_option("--shift", o.shift);
    };
    auto quad_opts = [&](CLI::App* c) {
        c->add_option("--target", o.target, "quadrature absolute error target");
        c->add_option("--phase-scale", o.phase_scale, "cycles of the fastest phase per panel");
        c->add_option("--max-panels", o.max_panels);
    };
    std::map<std::string, void (*)(const Options&, Report&)> handlers{
        {"count", cmd_count},         {"predict", cmd_predict},       {"omega", cmd_omega},
        {"expsum", cmd_expsum},       {"meanvalue", cmd_meanvalue},   {"kernel-check", cmd_kernel_check},
        {"vinogradov", cmd_vinogradov}, {"sweep", cmd_sweep},         {"verify", cmd_verify}};

    // -h is taken by --h (kernel order, Vinogradov shifts), so help is long-form only
    auto sub = [&](const char* name, const char* what) {
        auto* s = app.add_subcommand(name, what);
        s->set_help_flag("--help", "print help");
        return s;
    };
    auto* c = sub("count", "exact or tent-weighted count of |F(x) - nu| < tau");
    form_opts(c);
    c->add_option("--p", o.p);
    c->add_option("--tau", o.tau);
    c->add_option("--nu", o.nu);
    c->add_option("--method", o.method, "brute, mitm, tent or lambda-moment");

    c = sub("predict", "leading-term prediction");
    form_opts(c);
    c->add_flag("--definite", o.definite);
    c->add_option("--s", o.s);
    c->add_option("--p", o.p);
    c->add_option("--tau", o.tau);
    c->add_option("--nu", o.nu);
    c->add_option("--method", o.method, "omega method");
    c->add_option("--budget", o.budget);

    c = sub("omega", "the constant Omega(s, theta; lambda)");
    form_opts(c);
    c->add_option("--s", o.s);
    c->add_option("--method", o.method, "nested-quadrature, monte-carlo or volume-oracle");
    c->add_option("--budget", o.budget, "samples for the random methods");
    c->add_option("--eps", o.eps, "window of the volume oracle");

    c = sub("expsum", "f, g or upsilon at one point");
    c->add_option("--theta", o.theta);
    c->add_option("--lambda", o.lambda);
    c->add_option("--alpha", o.alpha);
    c->add_option("--p", o.p);
    c->add_option("--kind", o.kind, "f, g or upsilon");

    c = sub("meanvalue", "int_{-kappa}^{kappa} |f|^{2t}");
    c->add_option("--theta", o.theta);
    c->add_option("--t", o.t);
    c->add_option("--kappa", o.kappa);
    c->add_option("--p", o.p);
    c->add_option("--range", o.range, "unit for [1,P], dyadic for (P,2P]");
    quad_opts(c);

    c = sub("kernel-check", "kernel sandwich and decay on a grid");
    c->add_option("--tau", o.tau);
    c->add_option("--p", o.p);
    c->add_option("--h", o.kernel_h);
    c->add_option("--points", o.points);
    c->add_flag("--exclude-band", o.exclude_band);

    c = sub("vinogradov", "J_{t,k}(Y; h)");
    c->add_option("--t", o.t);
    c->add_option("--k", o.k);
    c->add_option("--y", o.y);
    c->add_option("--h", o.h, "comma list of k shifts");

    c = sub("sweep", "a quantity over a list of scales, with a fitted exponent");
    form_opts(c);
    c->add_option("--quantity", o.quantity, "count, definite, meanvalue, minor-arc, vinogradov, pipeline");
    c->add_option("--p", o.p, "comma list of P");
    c->add_option("--nu", o.nu, "comma list of nu (definite)");
    c->add_option("--y", o.y, "comma list of Y (vinogradov)");
    c->add_option("--tau", o.tau);
    c->add_option("--t", o.t);
    c->add_option("--k", o.k);
    c->add_option("--kappa", o.kappa);
    c->add_option("--h", o.kernel_h, "kernel order (pipeline)");
    c->add_option("--tail-target", o.tail_target);
    c->add_option("--grid", o.grid);
    c->add_option("--method", o.method, "omega method for predictions");
    c->add_option("--budget", o.budget);
    quad_opts(c);

    c = sub("verify", "run built-in invariant checks");
    c->add_option("--suite", o.suite, "sandwich, taylor, mitm or all");

    std::string command = "?";
    try {
        app.parse(argc, argv);
        command = app.get_subcommands().front()->get_name();
        if (o.threads) set_threads(o.threads);
        Report r;
        r.command = command;
        r.provenance["version"] = artifact_version;
        r.provenance["seed"] = o.seed;
        r.provenance["threads"] = threads();
        std::vector<std::string> args(argv + 1, argv + argc);
        r.provenance["argv"] = args;
        handlers.at(command)(o, r);
        r.provenance["params"] = r.params;
        emit(o, r);
        return r.exit_code;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        auto j = error_json("validation", e.what());
        j["command"] = command;
        std::cerr << j.dump() << "\n";
        return 2;
    } catch (const validation_error& e) {
        auto j = error_json("validation", e.what());
        j["command"] = command;
        std::cerr << j.dump() << "\n";
        return 2;
    } catch (const guard_error& e) {
        auto j = error_json("guard", e.what());
        j["error"]["work"] = e.work;
        j["error"]["bytes"] = e.bytes;
        j["command"] = command;
        std::cerr << j.dump() << "\n";
        return 3;
    } catch (const budget_error& e) {
        auto j = error_json("budget", e.what());
        j["error"]["estimate"] = e.estimate;
        j["error"]["error_estimate"] = e.error;
        j["command"] = command;
        std::cerr << j.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        auto j = error_json("internal", e.what());
        j["command"] = command;
        std::cerr << j.dump() << "\n";
        return 1;
    }
}

}  // namespace fraclab::cli
