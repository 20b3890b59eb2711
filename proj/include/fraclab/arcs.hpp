#pragma once

#include <cmath>
#include <optional>

#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"

namespace fraclab {

enum class Arc { major, minor, trivial };

// Major arc |alpha| < P^{-theta+delta0}, minor arc up to P^omega, trivial arc beyond.
struct ArcDissection {
    double theta;
    double P;
    double delta0;
    double omega;
    double gamma;  // fractional part of theta
    bool paper_exact_omega;

    double major_edge() const { return std::pow(P, -theta + delta0); }
    double trivial_edge() const { return std::pow(P, omega); }

    Arc classify(double alpha) const {
        double x = std::fabs(alpha);
        if (x < major_edge()) return Arc::major;
        if (x < trivial_edge()) return Arc::minor;
        return Arc::trivial;
    }
};

struct ArcOverrides {
    std::optional<double> delta0;
    std::optional<double> omega;
    bool paper_exact_omega = false;
};

inline ArcDissection dissect(double theta, double P, const ArcOverrides& o = {}) {
    check_theta(theta);
    require(std::isfinite(P) && P > 1, "dissection needs P > 1");
    double gamma = theta - std::floor(theta);
    double d0 = o.delta0.value_or(std::pow(4.0, -theta));
    double practical = (1 - gamma) / 12;
    double om = o.paper_exact_omega ? std::min(practical, std::pow(5.0, -100 * theta)) : practical;
    if (o.omega) om = *o.omega;
    require(d0 > 0 && d0 < theta, "delta0 must lie in (0, theta)");
    require(om >= 0, "omega must be nonnegative");
    ArcDissection d{theta, P, d0, om, gamma, o.paper_exact_omega};
    require(d.major_edge() < d.trivial_edge(), "overrides leave an empty minor arc");
    return d;
}

}  // namespace fraclab
