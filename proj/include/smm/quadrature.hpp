/**
 * @file quadrature.hpp
 * @brief Gauss rules for the Legendre (uniform on [-1,1]) and Hermite (standard
 *        normal) probability densities, plus Gauss-Legendre on an interval.
 *
 * Nodes come from the Golub-Welsch eigenproblem, are polished by Newton steps
 * on the orthonormal recurrence, and weights use the Christoffel formula
 * w_i = 1 / sum_k phi_k(x_i)^2, so the weights sum to one.
 */
#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "smm/error.hpp"
#include "smm/orthopoly.hpp"

namespace smm {

template <typename T>
struct GaussRule {
    std::vector<T> nodes;
    std::vector<T> weights;
};

template <typename T = double>
GaussRule<T> gauss_rule(Family family, std::size_t n) {
    using std::abs;
    if (n == 0) throw ConfigError("Gauss rule needs at least one node");
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    Vec diag = Vec::Zero(static_cast<Eigen::Index>(n));
    Vec sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
    for (std::size_t i = 1; i < n; ++i)
        sub(static_cast<Eigen::Index>(i - 1)) = recurrence_coefficient<T>(family, static_cast<unsigned>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    GaussRule<T> rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    std::vector<T> phi(n + 1), dphi(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        T x = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        for (int iter = 0; iter < 4; ++iter) {
            // phi_n and its derivative through the differentiated recurrence.
            phi[0] = T(1);
            dphi[0] = T(0);
            for (std::size_t k = 0; k < n; ++k) {
                const T ak1 = recurrence_coefficient<T>(family, static_cast<unsigned>(k + 1));
                const T ak = recurrence_coefficient<T>(family, static_cast<unsigned>(k));
                const T prev = k > 0 ? phi[k - 1] : T(0);
                const T dprev = k > 0 ? dphi[k - 1] : T(0);
                phi[k + 1] = (x * phi[k] - ak * prev) / ak1;
                dphi[k + 1] = (phi[k] + x * dphi[k] - ak * dprev) / ak1;
            }
            if (dphi[n] == T(0)) break;
            const T step = phi[n] / dphi[n];
            x -= step;
            if (abs(step) <= std::numeric_limits<T>::epsilon() * (T(1) + abs(x))) break;
        }
        eval_polys<T>(family, x, std::span<T>(phi.data(), n));
        T sum = T(0);
        for (std::size_t k = 0; k < n; ++k) sum += phi[k] * phi[k];
        rule.nodes[i] = x;
        rule.weights[i] = T(1) / sum;
    }
    return rule;
}

/// Gauss-Legendre rule for the Lebesgue measure on [a, b].
inline GaussRule<double> gauss_legendre_interval(std::size_t n, double a, double b) {
    GaussRule<double> rule = gauss_rule<double>(Family::Legendre, n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= (b - a);
    }
    return rule;
}

}  // namespace smm
