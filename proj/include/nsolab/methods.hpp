#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsolab/oracles.hpp"
#include "nsolab/types.hpp"

namespace nsolab {

struct MethodParams {
    double alpha = 0.01;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 1.0;
    std::uint64_t seed = 0;
    SubgradientSelection selection = SubgradientSelection::sign();
};

/// Method tags: "sg", "momentum", "rr", "cd".
struct IterateTrace {
    std::string method_id;
    std::string objective;
    MethodParams params;
    Point x_minus1;                         // previous point fed to the first step
    std::vector<Point> points;              // every iterate, inner ones included
    std::vector<double> f_values;           // f(points[j])
    std::vector<Point> selected_subgrads;   // step j uses selected_subgrads[j]
    std::vector<double> min_norm_proxy;     // d(0, df(points[j])) when recorded
    std::vector<std::size_t> outer_index;   // positions of x_0, x_1, ... in points
    std::vector<std::vector<std::size_t>> permutations;  // 0-based, one per epoch

    std::size_t steps() const { return selected_subgrads.size(); }
    const Point& last() const { return points.back(); }
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, IterateTrace partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const IterateTrace& partial() const { return partial_; }

private:
    IterateTrace partial_;
};

struct RunOptions {
    bool record_proxy = false;   // fill min_norm_proxy at every point
    double divergence_bound = 1e12;
};

IterateTrace run_subgradient(const ObjectiveSpec& spec, const Point& x0, const MethodParams& params,
                             std::size_t K, const RunOptions& opts = {});

IterateTrace run_momentum(const ObjectiveSpec& spec, const Point& x0, const Point& x_minus1,
                          const MethodParams& params, std::size_t K, const RunOptions& opts = {});

IterateTrace run_reshuffling(const ObjectiveSpec& spec, const Point& x0, const Point& x_prev_tail,
                             const MethodParams& params, std::size_t epochs,
                             const RunOptions& opts = {});

IterateTrace run_cyclic_cd(const ObjectiveSpec& spec, const Point& x0, const MethodParams& params,
                           std::size_t epochs, const RunOptions& opts = {});

/// x + beta (x - x_prev) - alpha g, skipping the momentum term when beta = 0.
/// Both the runners and the replay check go through this function.
Point momentum_step(const Point& x, const Point& x_prev, const Point& g, double alpha, double beta);

/// Re-derives every point from its predecessor and the stored subgradient.
/// Returns the largest deviation in units in the last place (0 = bitwise).
std::uint64_t replay_max_ulp(const IterateTrace& trace);

/// Rebuilds selected_subgrads from the points, the method tag, the params and
/// the recorded permutations, using the same oracle calls as the runners.
void recompute_subgradients(IterateTrace& trace, const ObjectiveSpec& spec);

/// Checks that every recorded permutation is a bijection on {0, ..., n-1}.
bool permutations_valid(const IterateTrace& trace);

}  // namespace nsolab
