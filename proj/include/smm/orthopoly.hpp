/**
 * @file orthopoly.hpp
 * @brief Orthonormal Legendre / probabilists' Hermite polynomials: 3jm symbols,
 *        triple-product (linearization) coefficients, inversion coefficients
 *        of y^k, and the banded univariate moment matrices K^k.
 *
 * Legendre polynomials are orthonormal for the density 1/2 on [-1, 1];
 * Hermite polynomials for the standard Gaussian density. Factorial ratios
 * are evaluated as sums of extended-precision log-factorials.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smm/banded.hpp"

namespace smm {

enum class Family { Legendre, Hermite };

std::string family_name(Family family);
/// Accepts "legendre" / "hermite" (case-insensitive); throws ConfigError otherwise.
Family parse_family(const std::string& name);

/// Coefficient a_n of the three-term recurrence y phi_n = a_{n+1} phi_{n+1} + a_n phi_{n-1}.
template <typename T = double>
T recurrence_coefficient(Family family, unsigned n) {
    if (n == 0) return T(0);
    const T nn = static_cast<T>(n);
    if (family == Family::Legendre) return nn / std::sqrt(T(4) * nn * nn - T(1));
    return std::sqrt(nn);
}

/// Fills out[0..size) with phi_0(y), ..., phi_{size-1}(y).
template <typename T>
void eval_polys(Family family, T y, std::span<T> out) {
    if (out.empty()) return;
    out[0] = T(1);
    if (out.size() == 1) return;
    out[1] = y / recurrence_coefficient<T>(family, 1);
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const T an = recurrence_coefficient<T>(family, static_cast<unsigned>(n));
        const T an1 = recurrence_coefficient<T>(family, static_cast<unsigned>(n + 1));
        out[n + 1] = (y * out[n] - an * out[n - 1]) / an1;
    }
}

/// Orthonormal polynomial phi_n(y).
double eval_poly(Family family, unsigned n, double y);

/// Squared 3jm symbol with zero magnetic quantum numbers; zero outside the selection rules.
double wigner3jm_sq(unsigned k, unsigned l, unsigned m);

/// E[phi_k phi_l phi_m]; equals the coefficient of phi_m in phi_k * phi_l.
double triple_coefficient(Family family, unsigned k, unsigned l, unsigned m);

/// Coefficients c_0..c_k with y^k = sum_n c_n phi_n(y).
std::vector<double> inversion_coefficients(Family family, unsigned k);

struct LinearizationTerm {
    unsigned degree;
    double coefficient;
};

/// Nonzero terms of phi_k * phi_l = sum_m c_m phi_m, ascending in m.
std::vector<LinearizationTerm> linearize_product(Family family, unsigned k, unsigned l);

/// K^k_{lm} = E[y^k phi_l phi_m] for 0 <= l, m < dim, stored with half bandwidth k.
struct KMatrix {
    Family family = Family::Legendre;
    unsigned k = 0;
    BandedSymmetric bands;

    std::size_t dim() const noexcept { return bands.dim(); }
    double operator()(std::size_t l, std::size_t m) const { return bands(l, m); }
};

KMatrix build_k_matrix(Family family, unsigned k, std::size_t dim);

/// log(n!) in extended precision.
long double log_factorial(std::uint64_t n);

}  // namespace smm
