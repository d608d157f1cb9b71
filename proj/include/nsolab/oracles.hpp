#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsolab/types.hpp"

namespace nsolab {

using ValueFn = std::function<double(const Point&)>;
using SubgradFn = std::function<Point(const Point&, const SubgradientSelection&)>;
using GeneratorsFn = std::function<std::vector<Point>(const Point&)>;
using VectorFn = std::function<Point(const Point&)>;

/// One summand f_i of f = (1/N) sum f_i.
struct ComponentOracle {
    ValueFn value;
    SubgradFn subgrad;
    GeneratorsFn generators;  // may be empty
};

struct CriticalSetOracle {
    std::function<double(const Point&)> distance;
    VectorFn project;
    std::function<Point(const Point& base, const Point& v)> tangent_project;
    VectorFn riemannian_grad;
    Point anchor;
    double valid_radius = 0.0;
};

struct ChetaevBundle {
    ValueFn C;
    double theta1 = 0.0;
    std::function<double(double alpha)> c1_of_alpha;
    Point anchor;
    double neighborhood_radius = 0.0;
    /// Closed-form value of C(x - alpha g) - C(x) for a step with subgradient g.
    std::function<double(const Point& x, const Point& g, double alpha)> predicted_increment;
    /// Magnitude the identity error is measured against; empty means absolute.
    std::function<double(const Point& x, const Point& g, double alpha)> increment_scale;
    /// C(next) - C(x) evaluated without cancellation; empty means plain difference.
    std::function<double(const Point& x, const Point& next)> increment;
};

struct MatrixShape {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

/// Synthetic robust-PCA data: f(X, Y) = ||X Y^T - M||_1.
struct RpcaInstance {
    std::size_t m = 20;       // rows of M and X
    std::size_t n = 12;       // columns of M, rows of Y
    std::size_t r = 3;        // factor rank
    std::size_t rank = 2;     // rank of the low-rank part of M
    double outlier_fraction = 0.05;
    std::uint64_t seed = 0;
    std::vector<double> M;    // m x n, row-major
    Point x_star;             // (X*, Y*) flattened
    double sigma_min = 0.0;   // smallest singular value of the top r x r block of X*

    double l1_norm_M() const;
};

/// Generates M (low rank plus sparse outliers, first r rows zeroed) and the
/// spurious critical point X* = [I_r; 0], Y* = 0.
RpcaInstance make_rpca_instance(std::uint64_t seed, std::size_t m = 20, std::size_t n = 12,
                                std::size_t r = 3, std::size_t rank = 2,
                                double outlier_fraction = 0.05);

struct ObjectiveSpec {
    std::string id;
    std::size_t n = 0;
    ValueFn value;
    SubgradFn subgrad;
    GeneratorsFn generators;               // empty when the entry has none
    std::vector<ComponentOracle> components;
    bool components_regular = false;       // every component is subdifferentially regular by construction
    VectorFn gradient;                     // C^1 entries only
    std::optional<CriticalSetOracle> critical_set;
    std::optional<ChetaevBundle> chetaev;
    std::function<bool(const Point&)> smooth_at;  // used when generators are absent
    std::vector<MatrixShape> shapes;
    std::shared_ptr<const RpcaInstance> rpca;
    Point default_anchor;
    std::string description;

    bool has_generators() const { return static_cast<bool>(generators); }
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

/// Catalog options. `quad_dim` sets the dimension of quad; `rpca_seed`
/// selects the synthetic RPCA matrix.
struct CatalogOptions {
    std::size_t quad_dim = 2;
    std::uint64_t rpca_seed = 0;
};

const std::vector<std::string>& catalog_ids();
ObjectiveSpec catalog_get(const std::string& id, const CatalogOptions& opts = {});

Point subgradient_select(const ObjectiveSpec& spec, const Point& x,
                         const SubgradientSelection& sel);

struct MinNormResult {
    Point vector;
    double norm = 0.0;
};

MinNormResult min_norm_subgradient(const ObjectiveSpec& spec, const Point& x);

double distance_to_critical(const ObjectiveSpec& spec, const Point& x);

/// Index into a generator list chosen by hashing (seed, bit pattern of x).
std::size_t hashed_choice(std::uint64_t seed, const Point& x, std::size_t count);

// Closed-form helpers shared with the analysis and probe modules.

/// Derivative of x^2 sin(1/x), with the value 0 at the origin.
double sin_example_derivative(double x);

/// Splits an rpca point into X (m x r) and Y (n x r), row-major.
struct RpcaView {
    const double* X;
    const double* Y;
};
RpcaView rpca_view(const RpcaInstance& inst, const Point& x);

/// Residual X Y^T - M.
std::vector<double> rpca_residual(const RpcaInstance& inst, const Point& x);

/// (Lambda Y, Lambda^T X) for a given sign matrix Lambda (m x n).
Point rpca_apply_lambda(const RpcaInstance& inst, const Point& x, const std::vector<double>& lambda);

/// Sign matrix used by a selection: sign of the residual with sign(0) = 0, or
/// +-1 at zero residuals for the seeded rule.
std::vector<double> rpca_lambda(const RpcaInstance& inst, const Point& x,
                                const SubgradientSelection& sel);

}  // namespace nsolab
