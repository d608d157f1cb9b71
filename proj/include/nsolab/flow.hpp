#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nsolab/oracles.hpp"
#include "nsolab/types.hpp"

namespace nsolab {

struct FlowParams {
    double c = 1.0;
    double h = 1e-3;
    double T = 1.0;
    SubgradientSelection selection = SubgradientSelection::min_norm();
    /// When the selected velocity flips direction across a step, step along
    /// the min-norm point of the two velocities instead (sliding on the kink).
    bool slide_on_kinks = true;
};

/// Euler samples of x'(t) in -c df(x(t)) on the grid 0, h, ..., T.
struct TrajectorySample {
    std::vector<double> times;
    std::vector<Point> states;
    std::vector<double> energy;    // cumulative integral of ||v||^2, energy[0] = 0
    std::vector<double> f_values;
    double c = 1.0;
    double h = 0.0;
    double max_speed = 0.0;        // largest ||v|| used, the L of the descent slack
    std::size_t slide_steps = 0;   // steps that used the two-point min-norm velocity
};

class FlowDivergenceError : public std::runtime_error {
public:
    FlowDivergenceError(const std::string& what, TrajectorySample partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const TrajectorySample& partial() const { return partial_; }

private:
    TrajectorySample partial_;
};

TrajectorySample integrate(const ObjectiveSpec& spec, const Point& x0, const FlowParams& params);

struct EnergyBalance {
    double lhs = 0.0;       // f(x(0)) - f(x(T))
    double rhs = 0.0;       // c * energy(T)
    double residual = 0.0;  // |lhs - rhs|
};

EnergyBalance energy_balance(const TrajectorySample& sample, const ObjectiveSpec& spec);

/// Largest increase f(t_{j+1}) - f(t_j) along the sample (0 when monotone).
double max_f_increase(const TrajectorySample& sample);

}  // namespace nsolab
