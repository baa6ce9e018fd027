#include "smm/sgfem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "smm/error.hpp"
#include "smm/parallel.hpp"
#include "smm/quadrature.hpp"

namespace smm {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Full (both triangles) Eigen copy of a symmetric sparse matrix, scaled.
SparseMatrix to_eigen(const RealMatrix& m, double scale) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * m.nnz_stored());
    m.for_each([&](std::size_t r, std::size_t c, double v) {
        t.emplace_back(static_cast<int>(r), static_cast<int>(c), scale * v);
        if (r != c) t.emplace_back(static_cast<int>(c), static_cast<int>(r), scale * v);
    });
    SparseMatrix out(static_cast<Eigen::Index>(m.dim()), static_cast<Eigen::Index>(m.dim()));
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

struct KroneckerTerm {
    SparseMatrix A;  // dofs x dofs
    SparseMatrix G;  // |basis| x |basis|
};

class KroneckerOperator {
public:
    KroneckerOperator(std::vector<KroneckerTerm> terms, unsigned threads)
        : terms_(std::move(terms)), threads_(threads) {}

    const std::vector<KroneckerTerm>& terms() const noexcept { return terms_; }

    /// Y = sum_g A_g U G_g, split over column blocks so the result does not
    /// depend on the worker count.
    void apply(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const {
        Y.setZero(U.rows(), U.cols());
        const Eigen::Index n = U.cols();
        const Eigen::Index block = 64;
        const auto blocks = static_cast<std::size_t>((n + block - 1) / block);
        parallel_for(blocks, threads_, [&](std::size_t b) {
            const Eigen::Index c0 = static_cast<Eigen::Index>(b) * block;
            const Eigen::Index len = std::min(block, n - c0);
            Eigen::MatrixXd T(U.rows(), len);
            for (const auto& term : terms_) {
                T.noalias() = U * term.G.middleCols(c0, len);
                Y.middleCols(c0, len).noalias() += term.A * T;
            }
        });
    }

private:
    std::vector<KroneckerTerm> terms_;
    unsigned threads_;
};

std::size_t zero_position(std::span<const MultiIndex> basis) {
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i].is_zero()) return i;
    throw ConfigError("the chaos basis must contain the zero multi-index");
}

std::vector<KroneckerTerm> build_terms(const NonAffineExpansion& expansion, const std::vector<MomentMatrix>& moments,
                                       std::size_t basis_size, const FemSpace& fem, unsigned threads) {
    const SparseMatrix identity = [&] {
        SparseMatrix I(static_cast<Eigen::Index>(basis_size), static_cast<Eigen::Index>(basis_size));
        I.setIdentity();
        return I;
    }();
    std::vector<KroneckerTerm> terms;
    if (expansion.spec.spatial == SpatialForm::Constant) {
        // Every spatial factor is constant: one group with a combined stochastic matrix.
        SparseMatrix G = expansion.a0 * identity;
        for (std::size_t i = 0; i < expansion.terms.size(); ++i)
            G += to_eigen(moments[i].values, expansion.terms[i].coefficient);
        terms.push_back({fem.stiffness([](double) { return 1.0; }), std::move(G)});
        return terms;
    }
    terms.resize(expansion.terms.size() + 1);
    terms[0] = {expansion.a0 * fem.stiffness([](double) { return 1.0; }), identity};
    parallel_for(expansion.terms.size(), threads, [&](std::size_t i) {
        const ExpansionTerm& t = expansion.terms[i];
        terms[i + 1].A = fem.stiffness([&](double x) {
            return t.coefficient * spatial_factor(SpatialForm::Sinusoidal, t.mu, x);
        });
        terms[i + 1].G = to_eigen(moments[i].values, 1.0);
    });
    return terms;
}

double frobenius(const Eigen::MatrixXd& M) { return M.norm(); }

ChaosSolution solve_system(const KroneckerOperator& op, std::vector<MultiIndex> basis, const FemSpace& fem,
                           const SolverOptions& options, SolveReport report) {
    const auto start = Clock::now();
    const std::size_t z = zero_position(basis);
    const auto n = static_cast<Eigen::Index>(basis.size());
    const auto d = static_cast<Eigen::Index>(fem.dofs());
    const Eigen::VectorXd f = fem.load();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, n);
    B.col(static_cast<Eigen::Index>(z)) = f;
    const double bnorm = frobenius(B);

    Eigen::MatrixXd U(d, n);
    report.groups = op.terms().size();
    if (op.terms().size() == 1) {
        // (G (x) A) vec(U) = e_z (x) f separates into A x = f and G g = e_z.
        report.separable = true;
        const Eigen::MatrixXd A = Eigen::MatrixXd(op.terms()[0].A);
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) throw NumericalError("spatial matrix is not positive definite", 0.0);
        const Eigen::VectorXd x = llt.solve(f);
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(op.terms()[0].G);
        if (ldlt.info() != Eigen::Success) throw NumericalError("stochastic matrix factorization failed", 0.0);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(static_cast<Eigen::Index>(z)) = 1.0;
        const Eigen::VectorXd g = ldlt.solve(e);
        U = x * g.transpose();
    } else {
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
        for (const auto& term : op.terms())
            mean += term.G.coeff(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)) * Eigen::MatrixXd(term.A);
        Eigen::LLT<Eigen::MatrixXd> precond(mean);
        if (precond.info() != Eigen::Success)
            throw NumericalError("mean stiffness matrix is not positive definite", 0.0);

        U.setZero();
        Eigen::MatrixXd R = B;
        Eigen::MatrixXd Z = precond.solve(R);
        Eigen::MatrixXd P = Z;
        Eigen::MatrixXd Q(d, n);
        double rz = (R.array() * Z.array()).sum();
        double rnorm = frobenius(R);
        double best = rnorm;
        std::size_t it = 0, best_it = 0;
        // Stop at the tolerance, or once the recursive residual has stalled at
        // rounding level; the true residual is checked below either way.
        while (rnorm > options.tolerance * bnorm && it < options.max_iterations &&
               it - best_it < options.stagnation_window) {
            op.apply(P, Q);
            const double pq = (P.array() * Q.array()).sum();
            if (!(pq > 0.0)) throw NumericalError("Galerkin operator is not positive definite", rnorm / bnorm);
            const double alpha = rz / pq;
            U.noalias() += alpha * P;
            R.noalias() -= alpha * Q;
            rnorm = frobenius(R);
            ++it;
            if (rnorm < best) {
                best = rnorm;
                best_it = it;
            }
            Z = precond.solve(R);
            const double rz_next = (R.array() * Z.array()).sum();
            P = Z + (rz_next / rz) * P;
            rz = rz_next;
        }
        report.iterations = it;
    }

    Eigen::MatrixXd AU(d, n);
    op.apply(U, AU);
    report.residual = frobenius(B - AU) / bnorm;
    report.solve_seconds = seconds_since(start);
    if (!(report.residual < options.residual_limit))
        throw NumericalError("Galerkin system residual above the limit", report.residual);
    return {std::move(basis), std::move(U), report};
}

}  // namespace

ChaosSolution assemble_and_solve(const NonAffineExpansion& expansion, const IndexSet& set, const FemSpace& fem,
                                 const SolverOptions& options) {
    const auto start = Clock::now();
    zero_position(set.indices());
    const auto xi = expansion.xi();
    const MomentAssembly moments =
        assemble_moment_matrices(set, xi, Family::Legendre, {options.threads, options.dense_threshold});
    KroneckerOperator op(build_terms(expansion, moments.matrices, set.size(), fem, options.threads), options.threads);
    SolveReport report;
    report.weight_count = moments.weight_count;
    report.locate_steps = moments.stats.locate_steps;
    report.assembly_seconds = seconds_since(start);
    return solve_system(op, set.indices(), fem, options, report);
}

ChaosSolution assemble_and_solve(const NonAffineExpansion& expansion, std::span<const MultiIndex> basis,
                                 const FemSpace& fem, const SolverOptions& options) {
    const auto start = Clock::now();
    zero_position(basis);
    const auto xi = expansion.xi();
    const MomentAssembly moments = assemble_moment_matrices(basis, xi, Family::Legendre, {options.threads, 0});
    KroneckerOperator op(build_terms(expansion, moments.matrices, basis.size(), fem, options.threads),
                         options.threads);
    SolveReport report;
    report.weight_count = moments.weight_count;
    report.assembly_seconds = seconds_since(start);
    return solve_system(op, {basis.begin(), basis.end()}, fem, options, report);
}

Statistics statistics(const ChaosSolution& solution, const FemSpace& fem) {
    const std::size_t z = zero_position(solution.basis);
    const Eigen::MatrixXd values = fem.columns_at_points(solution.coefficients);
    Statistics out;
    out.mean.resize(static_cast<std::size_t>(values.rows()));
    out.variance.assign(static_cast<std::size_t>(values.rows()), 0.0);
    for (Eigen::Index q = 0; q < values.rows(); ++q) {
        out.mean[static_cast<std::size_t>(q)] = values(q, static_cast<Eigen::Index>(z));
        double var = 0.0;
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            if (j != static_cast<Eigen::Index>(z)) var += values(q, j) * values(q, j);
        out.variance[static_cast<std::size_t>(q)] = var;
    }
    return out;
}

Statistics exact_statistics(const DiffusionSpec& spec, const FemSpace& fem, std::size_t points_per_dim) {
    if (spec.spatial != SpatialForm::Constant)
        throw ConfigError("closed-form statistics need a space-independent coefficient");
    const auto rule = gauss_rule<double>(Family::Legendre, points_per_dim);
    std::vector<std::size_t> node(spec.M, 0);
    std::vector<double> y(spec.M);
    long double m1 = 0.0L, m2 = 0.0L;
    for (;;) {
        double w = 1.0;
        for (std::uint32_t m = 0; m < spec.M; ++m) {
            y[m] = rule.nodes[node[m]];
            w *= rule.weights[node[m]];
        }
        const double inv = 1.0 / evaluate_closed_form(spec, y, 0.0);
        m1 += w * inv;
        m2 += w * inv * inv;
        std::uint32_t m = 0;
        for (; m < spec.M; ++m) {
            if (++node[m] < points_per_dim) break;
            node[m] = 0;
        }
        if (m == spec.M) break;
    }
    const double mean_inv = static_cast<double>(m1);
    const double var_inv = static_cast<double>(m2 - m1 * m1);
    Statistics out;
    for (double x : fem.points()) {
        const double q = 0.5 * (1.0 - x * x);
        out.mean.push_back(q * mean_inv);
        out.variance.push_back(q * q * var_inv);
    }
    return out;
}

RelativeErrors relative_errors(const Statistics& value, const Statistics& reference, const FemSpace& fem) {
    if (value.mean.size() != reference.mean.size() || value.variance.size() != reference.variance.size())
        throw DimensionError("statistics are given on different point sets");
    auto rel = [&](const std::vector<double>& a, const std::vector<double>& b, const char* what) {
        const double ref = fem.l2_norm(b);
        if (!(ref > 0.0)) throw DegenerateReferenceError(std::string("reference ") + what + " has zero norm");
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
        return 100.0 * fem.l2_norm(diff) / ref;
    };
    return {rel(value.mean, reference.mean, "mean"), rel(value.variance, reference.variance, "variance")};
}

std::vector<CoefficientNorm> coefficient_norms(const ChaosSolution& solution, const FemSpace& fem) {
    const SparseMatrix K = fem.stiffness([](double) { return 1.0; });
    std::vector<CoefficientNorm> out;
    out.reserve(solution.basis.size());
    for (std::size_t j = 0; j < solution.basis.size(); ++j) {
        const auto u = solution.coefficients.col(static_cast<Eigen::Index>(j));
        const double energy = u.dot(K * u);
        out.push_back({j, solution.basis[j], std::sqrt(std::max(0.0, energy))});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const CoefficientNorm& a, const CoefficientNorm& b) { return a.norm > b.norm; });
    return out;
}

namespace {

/// Least-squares slope of ys against xs.
double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

std::vector<double> estimate_weights(const ChaosSolution& solution, const FemSpace& fem, std::uint32_t M) {
    const auto norms = coefficient_norms(solution, fem);
    std::vector<double> g;
    for (Position m = 1; m <= M; ++m) {
        std::vector<std::pair<std::uint32_t, double>> ray;
        for (const auto& c : norms) {
            if (c.index.support_size() != 1 || c.index.pairs()[0].position != m) continue;
            if (c.norm > 0.0) ray.push_back({c.index.pairs()[0].value, 2.0 * std::log(c.norm)});
        }
        std::sort(ray.begin(), ray.end());
        if (ray.size() < 3)
            throw InsufficientDataError("too few coefficients along direction " + std::to_string(m) +
                                        " to estimate its weight");
        std::vector<double> xs, ys;
        for (const auto& [k, v] : ray) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(v);
        }
        g.push_back(-ls_slope(xs, ys));
    }
    return g;
}

std::vector<MultiIndex> best_m_select(const ChaosSolution& solution, const FemSpace& fem, std::size_t M) {
    if (M > solution.basis.size()) throw ConfigError("best-M size exceeds the solution's index set");
    const auto norms = coefficient_norms(solution, fem);
    std::vector<MultiIndex> out;
    out.reserve(M);
    for (std::size_t i = 0; i < M; ++i) out.push_back(norms[i].index);
    return out;
}

double fit_rate(std::span<const double> sorted_norms, std::size_t first, std::size_t last) {
    if (first < 1 || last < first || last > sorted_norms.size())
        throw InsufficientDataError("rate fit window outside the available ranks");
    std::vector<double> xs, ys;
    for (std::size_t r = first; r <= last; ++r) {
        const double v = sorted_norms[r - 1];
        if (!(v > 0.0)) continue;
        xs.push_back(std::log(static_cast<double>(r)));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 3) throw InsufficientDataError("rate fit needs at least 3 positive norms");
    return -ls_slope(xs, ys);
}

double evaluate_solution(const ChaosSolution& solution, const FemSpace& fem, std::span<const double> y, double x) {
    Position dims = 0;
    std::uint32_t degree = 0;
    for (const auto& a : solution.basis) {
        dims = std::max(dims, a.length());
        degree = std::max(degree, a.max_exponent());
    }
    if (y.size() < dims) throw DimensionError("too few random variables for the chaos basis");
    std::vector<std::vector<double>> phi(dims, std::vector<double>(degree + 1));
    for (Position m = 0; m < dims; ++m) eval_polys<double>(Family::Legendre, y[m], std::span<double>(phi[m]));
    double value = 0.0;
    for (std::size_t j = 0; j < solution.basis.size(); ++j) {
        double basis_value = 1.0;
        for (const auto& e : solution.basis[j].pairs()) basis_value *= phi[e.position - 1][e.value];
        value += basis_value * fem.value_at(solution.coefficients.col(static_cast<Eigen::Index>(j)), x);
    }
    return value;
}

}  // namespace smm
