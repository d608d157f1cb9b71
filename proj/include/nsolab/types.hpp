#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsolab {

/// Dense iterate/state vector. Matrix-variable problems store their blocks
/// row-major and back to back; the owning ObjectiveSpec records the layout.
using Point = std::vector<double>;

enum class SelectionRule {
    min_norm,
    deterministic_sign,
    seeded_random_extreme,
};

/// How an element of the Clarke subdifferential is picked at a point.
///
/// deterministic_sign uses sign(0) = 0 (and relu'(0) = 0) at every kink.
/// seeded_random_extreme picks an extreme point of the subdifferential by
/// hashing (seed, x), so the choice is reproducible.
struct SubgradientSelection {
    SelectionRule rule = SelectionRule::deterministic_sign;
    std::uint64_t seed = 0;

    static SubgradientSelection min_norm() { return {SelectionRule::min_norm, 0}; }
    static SubgradientSelection sign() { return {SelectionRule::deterministic_sign, 0}; }
    static SubgradientSelection random_extreme(std::uint64_t s) {
        return {SelectionRule::seeded_random_extreme, s};
    }
};

std::string to_string(SelectionRule rule);
SelectionRule selection_rule_from_string(const std::string& name);

// Errors.

class CatalogError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedOracleError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class OutOfNeighborhoodError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Small dense helpers.

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline Point sub(std::span<const double> a, std::span<const double> b) {
    Point out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Point add(std::span<const double> a, std::span<const double> b) {
    Point out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Point scaled(std::span<const double> a, double s) {
    Point out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline double sign0(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

}  // namespace nsolab
