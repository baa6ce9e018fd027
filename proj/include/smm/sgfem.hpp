/**
 * @file sgfem.hpp
 * @brief 1D stochastic Galerkin FEM for -(a(y,x) u')' = 1 on (-1,1) with
 *        homogeneous Dirichlet data and the non-affine coefficient
 *        a(y,x) = 1 + (1 + sum_m a_m(x) y_m)^p, y uniform on [-1,1]^M.
 *
 * The coefficient is expanded into monomials y^mu. Terms whose spatial
 * factors coincide are merged, so the Galerkin operator is a short sum of
 * Kronecker products G_g (x) A_g applied in matrix form as sum_g A_g U G_g
 * with U holding one coefficient vector per column.
 */
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smm/index_set.hpp"
#include "smm/moment.hpp"
#include "smm/multi_index.hpp"

namespace smm {

enum class SpatialForm { Constant, Sinusoidal };

std::string spatial_name(SpatialForm form);
SpatialForm parse_spatial(const std::string& name);

/// a_m(x) = m^-s (constant) or m^-s sin(m pi x) (sinusoidal).
struct DiffusionSpec {
    std::uint32_t M = 2;
    double s = 1.5;
    std::uint32_t p = 1;
    SpatialForm spatial = SpatialForm::Constant;
};

/// y^mu term: a_mu(x) = coefficient * prod_m sin(m pi x)^mu_m (sinusoidal) or coefficient.
struct ExpansionTerm {
    MultiIndex mu;
    double coefficient = 0.0;
};

struct NonAffineExpansion {
    DiffusionSpec spec;
    double a0 = 2.0;
    std::vector<ExpansionTerm> terms;  ///< mu != 0, in isoTD(M, p) generation order
    Position tilde_m = 0;

    std::vector<MultiIndex> xi() const;
    /// Number of terms including a0.
    std::size_t term_count() const noexcept { return terms.size() + 1; }
};

struct PositivityReport {
    double interval_bound = 0.0;  ///< rigorous lower bound of a over Gamma x D
    double sampled_min = 0.0;     ///< minimum over the Sobol sample
    std::size_t samples = 0;
};

/// Interval lower bound of a plus Sobol sampling of (y, x).
PositivityReport check_positivity(const DiffusionSpec& spec, std::size_t samples = 10000);

/// Multinomial expansion; throws ConfigError for bad parameters and ModelError
/// if either positivity check is not strictly positive.
NonAffineExpansion expand_diffusion(const DiffusionSpec& spec);

double spatial_factor(SpatialForm form, const MultiIndex& mu, double x);
double evaluate(const NonAffineExpansion& expansion, std::span<const double> y, double x);
double evaluate_closed_form(const DiffusionSpec& spec, std::span<const double> y, double x);

/// Conforming p-FEM on a uniform mesh of (-1,1) with integrated-Legendre
/// shape functions. Dofs are numbered element by element: the order-1
/// bubbles of element e, then the vertex on its right (boundary vertices are
/// eliminated), giving elements * order - 1 unknowns.
class FemSpace {
public:
    explicit FemSpace(std::size_t elements = 20, std::size_t order = 4, std::size_t quadrature_points = 14);

    std::size_t elements() const noexcept { return elements_; }
    std::size_t order() const noexcept { return order_; }
    std::size_t dofs() const noexcept { return elements_ * order_ - 1; }
    double element_size() const noexcept { return 2.0 / static_cast<double>(elements_); }

    /// Global dof of local shape function i of element e, or nullopt on the boundary.
    /// Local order: left vertex, right vertex, bubbles 2..order.
    std::optional<std::size_t> global_dof(std::size_t element, std::size_t local) const;

    /// Global quadrature points and weights (element-major).
    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// int coef(x) phi_i' phi_j' dx.
    template <typename F>
    Eigen::SparseMatrix<double> stiffness(F&& coef) const {
        std::vector<double> values(points_.size());
        for (std::size_t q = 0; q < points_.size(); ++q) values[q] = coef(points_[q]);
        return stiffness_from_values(values);
    }
    Eigen::SparseMatrix<double> stiffness_from_values(std::span<const double> coef_at_points) const;
    /// int phi_i dx.
    Eigen::VectorXd load() const;

    /// Values of the FEM function with coefficients `u` at every quadrature point.
    std::vector<double> values_at_points(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    /// Values at every quadrature point for all columns of U (rows = points).
    Eigen::MatrixXd columns_at_points(const Eigen::MatrixXd& U) const;
    double value_at(const Eigen::Ref<const Eigen::VectorXd>& u, double x) const;

    /// sqrt(sum_q w_q f_q^2).
    double l2_norm(std::span<const double> values_at_points) const;

private:
    void local_shapes(double xi, std::vector<double>& value, std::vector<double>& deriv) const;

    std::size_t elements_;
    std::size_t order_;
    std::size_t nq_;
    std::vector<double> points_;
    std::vector<double> weights_;
    std::vector<double> ref_value_;  // [q * (order+1) + i]
    std::vector<double> ref_deriv_;
    Eigen::SparseMatrix<double> evaluation_;  // points x dofs
};

struct SolverOptions {
    double tolerance = 1e-15;  ///< relative CG residual target
    std::size_t max_iterations = 20000;
    std::size_t stagnation_window = 50;
    double residual_limit = 1e-9;
    unsigned threads = 1;
    std::size_t dense_threshold = 64;
};

struct SolveReport {
    std::size_t iterations = 0;
    double residual = 0.0;  ///< relative residual of the assembled system
    bool separable = false; ///< single spatial group, solved by two factorizations
    std::size_t groups = 0;
    std::size_t weight_count = 0;
    std::size_t locate_steps = 0;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;
};

struct ChaosSolution {
    std::vector<MultiIndex> basis;
    Eigen::MatrixXd coefficients;  ///< dofs x |basis|, column j belongs to basis[j]
    SolveReport report;
};

/// Tree-backed set: moment matrices come from the neighbour pipeline.
ChaosSolution assemble_and_solve(const NonAffineExpansion& expansion, const IndexSet& set, const FemSpace& fem,
                                 const SolverOptions& options = {});
/// Arbitrary list containing the zero multi-index (e.g. a best-M set).
ChaosSolution assemble_and_solve(const NonAffineExpansion& expansion, std::span<const MultiIndex> basis,
                                 const FemSpace& fem, const SolverOptions& options = {});

/// Mean and variance at the FEM quadrature points.
struct Statistics {
    std::vector<double> mean;
    std::vector<double> variance;
};

Statistics statistics(const ChaosSolution& solution, const FemSpace& fem);

/// Closed-form statistics of u = (1 - x^2) / (2 a(y)) for a space-independent
/// coefficient, using tensor Gauss-Legendre in y.
Statistics exact_statistics(const DiffusionSpec& spec, const FemSpace& fem, std::size_t points_per_dim = 32);

struct RelativeErrors {
    double mean_pct = 0.0;
    double var_pct = 0.0;
};

/// Throws DegenerateReferenceError if a reference norm is zero.
RelativeErrors relative_errors(const Statistics& value, const Statistics& reference, const FemSpace& fem);

struct CoefficientNorm {
    std::size_t ordinal = 0;
    MultiIndex index;
    double norm = 0.0;
};

/// V-norms ||u_mu'||_L2, sorted non-increasing (ties by ordinal).
std::vector<CoefficientNorm> coefficient_norms(const ChaosSolution& solution, const FemSpace& fem);

/// Decay rates g_m: minus the least-squares slope of log ||u_{k e_m}||_V^2
/// against k over the rays k e_m, k = 1, 2, ... present in the set.
/// Throws InsufficientDataError if a ray has fewer than 3 usable points.
std::vector<double> estimate_weights(const ChaosSolution& solution, const FemSpace& fem, std::uint32_t M);

/// The M multi-indices with the largest V-norms, in rank order.
std::vector<MultiIndex> best_m_select(const ChaosSolution& solution, const FemSpace& fem, std::size_t M);

/// -slope of log(norm) against log(rank) over 1-based ranks [first, last].
double fit_rate(std::span<const double> sorted_norms, std::size_t first, std::size_t last);

/// u(y, x) of the chaos expansion (Legendre family).
double evaluate_solution(const ChaosSolution& solution, const FemSpace& fem, std::span<const double> y, double x);

}  // namespace smm
