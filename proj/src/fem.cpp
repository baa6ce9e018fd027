#include <algorithm>
#include <cmath>

#include "smm/error.hpp"
#include "smm/quadrature.hpp"
#include "smm/sgfem.hpp"

namespace smm {

FemSpace::FemSpace(std::size_t elements, std::size_t order, std::size_t quadrature_points)
    : elements_(elements), order_(order), nq_(quadrature_points) {
    if (elements == 0) throw ConfigError("FEM mesh needs at least one element");
    if (order < 1) throw ConfigError("FEM order must be at least 1");
    if (elements * order < 2) throw ConfigError("FEM space has no interior dofs");
    if (quadrature_points < order + 1) throw ConfigError("too few quadrature points for the FEM order");

    const auto rule = gauss_rule<double>(Family::Legendre, nq_);
    const std::size_t nloc = order_ + 1;
    ref_value_.resize(nq_ * nloc);
    ref_deriv_.resize(nq_ * nloc);
    std::vector<double> v, d;
    for (std::size_t q = 0; q < nq_; ++q) {
        local_shapes(rule.nodes[q], v, d);
        std::copy(v.begin(), v.end(), ref_value_.begin() + static_cast<std::ptrdiff_t>(q * nloc));
        std::copy(d.begin(), d.end(), ref_deriv_.begin() + static_cast<std::ptrdiff_t>(q * nloc));
    }

    const double h = element_size();
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t e = 0; e < elements_; ++e) {
        const double left = -1.0 + h * static_cast<double>(e);
        for (std::size_t q = 0; q < nq_; ++q) {
            const std::size_t row = e * nq_ + q;
            points_.push_back(left + 0.5 * h * (rule.nodes[q] + 1.0));
            // Probability weights sum to one on the reference element of length 2.
            weights_.push_back(rule.weights[q] * h);
            for (std::size_t i = 0; i < nloc; ++i)
                if (const auto g = global_dof(e, i))
                    triplets.emplace_back(static_cast<int>(row), static_cast<int>(*g), ref_value_[q * nloc + i]);
        }
    }
    evaluation_.resize(static_cast<Eigen::Index>(points_.size()), static_cast<Eigen::Index>(dofs()));
    evaluation_.setFromTriplets(triplets.begin(), triplets.end());
}

void FemSpace::local_shapes(double xi, std::vector<double>& value, std::vector<double>& deriv) const {
    const std::size_t nloc = order_ + 1;
    value.assign(nloc, 0.0);
    deriv.assign(nloc, 0.0);
    value[0] = 0.5 * (1.0 - xi);
    value[1] = 0.5 * (1.0 + xi);
    deriv[0] = -0.5;
    deriv[1] = 0.5;
    // Standard Legendre P_0..P_order.
    std::vector<double> P(order_ + 1);
    P[0] = 1.0;
    if (order_ >= 1) P[1] = xi;
    for (std::size_t n = 1; n < order_; ++n)
        P[n + 1] = ((2.0 * n + 1.0) * xi * P[n] - static_cast<double>(n) * P[n - 1]) / (static_cast<double>(n) + 1.0);
    for (std::size_t j = 2; j <= order_; ++j) {
        const double jj = static_cast<double>(j);
        value[j] = (P[j] - P[j - 2]) / std::sqrt(2.0 * (2.0 * jj - 1.0));
        deriv[j] = std::sqrt((2.0 * jj - 1.0) / 2.0) * P[j - 1];
    }
}

std::optional<std::size_t> FemSpace::global_dof(std::size_t element, std::size_t local) const {
    if (element >= elements_ || local > order_) throw DimensionError("local dof out of range");
    const std::size_t base = element * order_;
    if (local == 0) {
        if (element == 0) return std::nullopt;
        return base - 1;
    }
    if (local == 1) {
        if (element + 1 == elements_) return std::nullopt;
        return base + order_ - 1;
    }
    return base + (local - 2);
}

Eigen::SparseMatrix<double> FemSpace::stiffness_from_values(std::span<const double> coef) const {
    if (coef.size() != points_.size()) throw DimensionError("coefficient values do not match the quadrature points");
    const std::size_t nloc = order_ + 1;
    const double jac = 2.0 / element_size();
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> local(nloc * nloc);
    for (std::size_t e = 0; e < elements_; ++e) {
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < nq_; ++q) {
            const double w = weights_[e * nq_ + q] * coef[e * nq_ + q] * jac * jac;
            const double* dphi = &ref_deriv_[q * nloc];
            for (std::size_t i = 0; i < nloc; ++i)
                for (std::size_t j = 0; j < nloc; ++j) local[i * nloc + j] += w * (dphi[i] * dphi[j]);
        }
        for (std::size_t i = 0; i < nloc; ++i) {
            const auto gi = global_dof(e, i);
            if (!gi) continue;
            for (std::size_t j = 0; j < nloc; ++j)
                if (const auto gj = global_dof(e, j))
                    triplets.emplace_back(static_cast<int>(*gi), static_cast<int>(*gj), local[i * nloc + j]);
        }
    }
    Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(dofs()), static_cast<Eigen::Index>(dofs()));
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

Eigen::VectorXd FemSpace::load() const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs()));
    const std::size_t nloc = order_ + 1;
    for (std::size_t e = 0; e < elements_; ++e)
        for (std::size_t q = 0; q < nq_; ++q)
            for (std::size_t i = 0; i < nloc; ++i)
                if (const auto g = global_dof(e, i))
                    f(static_cast<Eigen::Index>(*g)) += weights_[e * nq_ + q] * ref_value_[q * nloc + i];
    return f;
}

std::vector<double> FemSpace::values_at_points(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    if (static_cast<std::size_t>(u.size()) != dofs()) throw DimensionError("coefficient vector has the wrong size");
    const Eigen::VectorXd v = evaluation_ * u;
    return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd FemSpace::columns_at_points(const Eigen::MatrixXd& U) const {
    if (static_cast<std::size_t>(U.rows()) != dofs()) throw DimensionError("coefficient matrix has the wrong size");
    return evaluation_ * U;
}

double FemSpace::value_at(const Eigen::Ref<const Eigen::VectorXd>& u, double x) const {
    if (!(x >= -1.0 && x <= 1.0)) throw DimensionError("evaluation point outside the domain");
    const double h = element_size();
    const auto e = std::min<std::size_t>(elements_ - 1, static_cast<std::size_t>((x + 1.0) / h));
    const double xi = 2.0 * (x - (-1.0 + h * static_cast<double>(e))) / h - 1.0;
    std::vector<double> v, d;
    local_shapes(xi, v, d);
    double value = 0.0;
    for (std::size_t i = 0; i <= order_; ++i)
        if (const auto g = global_dof(e, i)) value += u(static_cast<Eigen::Index>(*g)) * v[i];
    return value;
}

double FemSpace::l2_norm(std::span<const double> values) const {
    if (values.size() != points_.size()) throw DimensionError("values do not match the quadrature points");
    double s = 0.0;
    for (std::size_t q = 0; q < values.size(); ++q) s += weights_[q] * values[q] * values[q];
    return std::sqrt(s);
}

}  // namespace smm
