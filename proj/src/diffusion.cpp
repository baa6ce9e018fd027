#include <algorithm>
#include <boost/random/sobol.hpp>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "smm/error.hpp"
#include "smm/sgfem.hpp"

namespace smm {

std::string spatial_name(SpatialForm form) { return form == SpatialForm::Constant ? "constant" : "sinusoidal"; }

SpatialForm parse_spatial(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "constant") return SpatialForm::Constant;
    if (lower == "sinusoidal") return SpatialForm::Sinusoidal;
    throw ConfigError("unknown spatial form '" + name + "'");
}

std::vector<MultiIndex> NonAffineExpansion::xi() const {
    std::vector<MultiIndex> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.mu);
    return out;
}

namespace {

void validate(const DiffusionSpec& spec) {
    if (spec.M == 0) throw ConfigError("diffusion needs at least one random variable");
    if (spec.p == 0) throw ConfigError("diffusion power must be positive");
    if (!(spec.s > 0.0) || !std::isfinite(spec.s)) throw ConfigError("decay exponent s must be positive");
}

double amplitude(const DiffusionSpec& spec, std::uint32_t m) { return std::pow(static_cast<double>(m), -spec.s); }

}  // namespace

double spatial_factor(SpatialForm form, const MultiIndex& mu, double x) {
    if (form == SpatialForm::Constant) return 1.0;
    double v = 1.0;
    for (const auto& e : mu.pairs())
        v *= std::pow(std::sin(static_cast<double>(e.position) * std::numbers::pi * x), static_cast<double>(e.value));
    return v;
}

double evaluate_closed_form(const DiffusionSpec& spec, std::span<const double> y, double x) {
    if (y.size() < spec.M) throw DimensionError("too few random variables for the diffusion coefficient");
    double bracket = 1.0;
    for (std::uint32_t m = 1; m <= spec.M; ++m) {
        double am = amplitude(spec, m);
        if (spec.spatial == SpatialForm::Sinusoidal) am *= std::sin(m * std::numbers::pi * x);
        bracket += am * y[m - 1];
    }
    return 1.0 + std::pow(bracket, static_cast<double>(spec.p));
}

double evaluate(const NonAffineExpansion& expansion, std::span<const double> y, double x) {
    if (y.size() < expansion.spec.M) throw DimensionError("too few random variables for the expansion");
    double value = expansion.a0;
    for (const auto& t : expansion.terms) {
        double monomial = 1.0;
        for (const auto& e : t.mu.pairs()) monomial *= std::pow(y[e.position - 1], static_cast<double>(e.value));
        value += t.coefficient * spatial_factor(expansion.spec.spatial, t.mu, x) * monomial;
    }
    return value;
}

PositivityReport check_positivity(const DiffusionSpec& spec, std::size_t samples) {
    validate(spec);
    PositivityReport report;
    double sum = 0.0;
    for (std::uint32_t m = 1; m <= spec.M; ++m) sum += amplitude(spec, m);
    const double lo = 1.0 - sum;
    const double p = static_cast<double>(spec.p);
    double bracket_min = 0.0;
    if (spec.p % 2 == 1) {
        bracket_min = std::pow(lo, p);
    } else if (lo > 0.0) {
        bracket_min = std::pow(lo, p);
    }
    report.interval_bound = 1.0 + bracket_min;

    boost::random::sobol sobol(spec.M + 1);
    const double scale = static_cast<double>(sobol.max()) - static_cast<double>(sobol.min()) + 1.0;
    std::vector<double> y(spec.M);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        for (auto& v : y) v = 2.0 * (static_cast<double>(sobol() - sobol.min()) / scale) - 1.0;
        const double x = 2.0 * (static_cast<double>(sobol() - sobol.min()) / scale) - 1.0;
        best = std::min(best, evaluate_closed_form(spec, y, x));
    }
    report.sampled_min = best;
    report.samples = samples;
    return report;
}

NonAffineExpansion expand_diffusion(const DiffusionSpec& spec) {
    validate(spec);
    const PositivityReport positivity = check_positivity(spec);
    if (!(positivity.interval_bound > 0.0) || !(positivity.sampled_min > 0.0))
        throw ModelError("diffusion coefficient is not uniformly positive (interval bound " +
                         std::to_string(positivity.interval_bound) + ", sampled minimum " +
                         std::to_string(positivity.sampled_min) + ")");

    NonAffineExpansion out;
    out.spec = spec;
    out.a0 = 2.0;
    const IndexSet monomials = IndexSet::build(IsoTdSpec{spec.M, spec.p});
    const double log_p_fact = std::lgamma(static_cast<double>(spec.p) + 1.0);
    for (const auto& mu : monomials.indices()) {
        if (mu.is_zero()) continue;
        // p! / ((p - |mu|)! prod mu_m!) prod (m^-s)^mu_m
        double log_c = log_p_fact - std::lgamma(static_cast<double>(spec.p - mu.order()) + 1.0);
        double amp = 1.0;
        for (const auto& e : mu.pairs()) {
            log_c -= std::lgamma(static_cast<double>(e.value) + 1.0);
            amp *= std::pow(amplitude(spec, e.position), static_cast<double>(e.value));
        }
        out.terms.push_back({mu, std::round(std::exp(log_c)) * amp});
        out.tilde_m = std::max(out.tilde_m, mu.length());
    }
    return out;
}

}  // namespace smm
