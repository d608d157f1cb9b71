#include "nsolab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsolab/hull.hpp"

namespace nsolab {

TrajectorySample integrate(const ObjectiveSpec& spec, const Point& x0, const FlowParams& p) {
    if (!(p.c > 0.0)) throw PreconditionError("flow: c must be positive");
    if (!(p.h > 0.0) || !(p.T > 0.0) || p.h > p.T)
        throw PreconditionError("flow: need 0 < h <= T");
    if (x0.size() != spec.n) throw std::invalid_argument("flow: x0 has the wrong dimension");

    const auto steps = static_cast<std::size_t>(std::llround(p.T / p.h));
    TrajectorySample s;
    s.c = p.c;
    s.h = p.h;
    s.times.reserve(steps + 1);
    s.states.reserve(steps + 1);
    s.energy.reserve(steps + 1);
    s.f_values.reserve(steps + 1);

    Point x = x0;
    double e = 0.0;
    s.times.push_back(0.0);
    s.states.push_back(x);
    s.energy.push_back(0.0);
    s.f_values.push_back(spec.value(x));

    const double hc = p.h * p.c;
    for (std::size_t j = 0; j < steps; ++j) {
        const Point v = subgradient_select(spec, x, p.selection);
        const auto ahead = [&](double tau) {
            Point y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - tau * hc * v[i];
            return y;
        };
        Point w;
        bool crossed = false;
        if (p.slide_on_kinks) {
            w = subgradient_select(spec, ahead(1.0), p.selection);
            crossed = dot(v, w) < 0.0;
        }
        if (!crossed) {
            const double speed2 = norm2(v);
            s.max_speed = std::max(s.max_speed, std::sqrt(speed2));
            x = ahead(1.0);
            e += p.h * speed2;
        } else {
            // Locate the kink by bisection, then spend the rest of the step on the hull direction.
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Point wm = subgradient_select(spec, ahead(mid), p.selection);
                if (dot(v, wm) < 0.0) {
                    hi = mid;
                    w = wm;
                } else {
                    lo = mid;
                }
            }
            const Point slide = min_norm_in_hull({v, w}).point;
            x = ahead(lo);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= (1.0 - lo) * hc * slide[i];
            s.max_speed = std::max({s.max_speed, norm(v), norm(slide)});
            e += p.h * (lo * norm2(v) + (1.0 - lo) * norm2(slide));
            ++s.slide_steps;
        }
        if (!all_finite(x) || norm(x) > 1e12) {
            std::ostringstream os;
            os << "flow on " << spec.id << " diverged at step " << j + 1;
            throw FlowDivergenceError(os.str(), std::move(s));
        }
        s.times.push_back(static_cast<double>(j + 1) * p.h);
        s.states.push_back(x);
        s.energy.push_back(e);
        s.f_values.push_back(spec.value(x));
    }
    return s;
}

EnergyBalance energy_balance(const TrajectorySample& sample, const ObjectiveSpec&) {
    EnergyBalance b;
    b.lhs = sample.f_values.front() - sample.f_values.back();
    b.rhs = sample.c * sample.energy.back();
    b.residual = std::abs(b.lhs - b.rhs);
    return b;
}

double max_f_increase(const TrajectorySample& sample) {
    double worst = 0.0;
    for (std::size_t j = 1; j < sample.f_values.size(); ++j)
        worst = std::max(worst, sample.f_values[j] - sample.f_values[j - 1]);
    return worst;
}

}  // namespace nsolab
