#pragma once

// Thin wrappers over Boost.Math quadrature used across the modules.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace stablesde::quad {

/// Nodes and weights of an N-point Gauss-Legendre rule mapped to [a, b].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

template <unsigned N>
Rule gauss_legendre(double a, double b) {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Rule rule;
    rule.nodes.reserve(N);
    rule.weights.reserve(N);
    // Boost stores the non-negative half of the symmetric rule.
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) {
            continue;
        }
        rule.nodes.push_back(mid - half * x[i]);
        rule.weights.push_back(half * w[i]);
    }
    if (x[0] == 0.0) {
        rule.nodes.push_back(mid);
        rule.weights.push_back(half * w[0]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            continue;
        }
        rule.nodes.push_back(mid + half * x[i]);
        rule.weights.push_back(half * w[i]);
    }
    return rule;
}

template <unsigned N, class F>
double gauss(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, N>::integrate(std::forward<F>(f), a, b);
}

/// Adaptive 31-point Gauss-Kronrod on a finite interval.
template <class F>
double kronrod(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 15) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(std::forward<F>(f), a, b, max_depth,
                                                                         rel_tol);
}

/// Double-exponential rule; robust to integrable endpoint singularities.
template <class F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12) {
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(std::forward<F>(f), a, b, rel_tol);
}

} // namespace stablesde::quad
