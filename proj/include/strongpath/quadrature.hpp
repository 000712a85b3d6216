#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "strongpath/errors.hpp"

namespace strongpath {

// Tolerances for the adaptive integrators backing the deterministic special functions.
struct Quadrature {
    double rel_tol = 1e-10;
    unsigned max_subdivisions = 15;
};

namespace detail {

inline void check_quadrature(const Quadrature& q) {
    if (!(q.rel_tol > 0.0)) {
        throw DomainError("quadrature rel_tol must be positive");
    }
}

}  // namespace detail

// Smooth integrand on a finite interval.
template <class F>
[[nodiscard]] double integrate_smooth(F&& f, double a, double b, const Quadrature& q = {}) {
    detail::check_quadrature(q);
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, q.max_subdivisions, q.rel_tol);
}

// Finite interval, integrable endpoint singularities allowed.
template <class F>
[[nodiscard]] double integrate_endpoint_singular(F&& f, double a, double b, const Quadrature& q = {}) {
    detail::check_quadrature(q);
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator(q.max_subdivisions);
    return integrator.integrate(f, a, b, q.rel_tol);
}

// [a, +inf).
template <class F>
[[nodiscard]] double integrate_to_infinity(F&& f, double a, const Quadrature& q = {}) {
    detail::check_quadrature(q);
    boost::math::quadrature::exp_sinh<double> integrator(q.max_subdivisions);
    return integrator.integrate(f, a, std::numeric_limits<double>::infinity(), q.rel_tol);
}

}  // namespace strongpath
