#include "smm/orthopoly.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cctype>
#include <cstdlib>

#include "smm/error.hpp"

namespace smm {

namespace {

constexpr std::uint64_t kTableSize = 4096;

const std::vector<long double>& log_factorial_table() {
    static const std::vector<long double> table = [] {
        std::vector<long double> t(kTableSize);
        for (std::uint64_t n = 0; n < kTableSize; ++n) t[n] = std::lgammal(static_cast<long double>(n) + 1.0L);
        return t;
    }();
    return table;
}

/// log((2j-1)!!) for odd argument 2j-1 >= -1, via (2j)! / (2^j j!).
long double log_odd_double_factorial(std::int64_t odd) {
    const auto j = static_cast<std::uint64_t>((odd + 1) / 2);
    return log_factorial(2 * j) - static_cast<long double>(j) * std::log(2.0L) - log_factorial(j);
}

bool selection_rules(unsigned k, unsigned l, unsigned m) {
    if ((k + l + m) % 2 != 0) return false;
    const unsigned lo = k > l ? k - l : l - k;
    return lo <= m && m <= k + l;
}

void sort3(unsigned& a, unsigned& b, unsigned& c) {
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
}

}  // namespace

long double log_factorial(std::uint64_t n) {
    if (n < kTableSize) return log_factorial_table()[n];
    return std::lgammal(static_cast<long double>(n) + 1.0L);
}

std::string family_name(Family family) { return family == Family::Legendre ? "legendre" : "hermite"; }

Family parse_family(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "legendre") return Family::Legendre;
    if (lower == "hermite") return Family::Hermite;
    throw ConfigError("unknown polynomial family '" + name + "'");
}

double eval_poly(Family family, unsigned n, double y) {
    std::vector<double> values(n + 1);
    eval_polys<double>(family, y, values);
    return values[n];
}

double wigner3jm_sq(unsigned k, unsigned l, unsigned m) {
    if (!selection_rules(k, l, m)) return 0.0;
    // Fixed argument order keeps the value bitwise symmetric.
    sort3(k, l, m);
    const std::uint64_t g = (std::uint64_t{k} + l + m) / 2;
    const long double log_value = log_factorial(2 * g - 2 * k) + log_factorial(2 * g - 2 * l) +
                                  log_factorial(2 * g - 2 * m) - log_factorial(2 * g + 1) +
                                  2.0L * (log_factorial(g) - log_factorial(g - k) - log_factorial(g - l) -
                                          log_factorial(g - m));
    return static_cast<double>(std::exp(log_value));
}

namespace {

long double triple_coefficient_ld(Family family, unsigned k, unsigned l, unsigned m) {
    if (!selection_rules(k, l, m)) return 0.0L;
    sort3(k, l, m);
    const std::uint64_t g = (std::uint64_t{k} + l + m) / 2;
    if (family == Family::Legendre) {
        const long double log_w = log_factorial(2 * g - 2 * k) + log_factorial(2 * g - 2 * l) +
                                  log_factorial(2 * g - 2 * m) - log_factorial(2 * g + 1) +
                                  2.0L * (log_factorial(g) - log_factorial(g - k) - log_factorial(g - l) -
                                          log_factorial(g - m));
        const long double scale = std::sqrt(static_cast<long double>(2 * k + 1) * (2 * l + 1) * (2 * m + 1));
        return scale * std::exp(log_w);
    }
    // sqrt(k! l! m!) / ((g-k)! (g-l)! (g-m)!)
    const long double log_h = 0.5L * (log_factorial(k) + log_factorial(l) + log_factorial(m)) - log_factorial(g - k) -
                              log_factorial(g - l) - log_factorial(g - m);
    return std::exp(log_h);
}

std::vector<long double> inversion_coefficients_ld(Family family, unsigned k) {
    std::vector<long double> c(k + 1, 0.0L);
    for (unsigned n = k % 2; n <= k; n += 2) {
        // C(k, n) n! = k! / (k - n)!
        long double log_c = log_factorial(k) - log_factorial(k - n);
        const auto odd = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(n) - 1;
        if (family == Family::Legendre) {
            log_c += 0.5L * std::log(static_cast<long double>(2 * n + 1)) + log_odd_double_factorial(odd) -
                     log_odd_double_factorial(static_cast<std::int64_t>(k) + n + 1);
        } else {
            // C(k, n) sqrt(n!) (k-n-1)!!
            log_c += -0.5L * log_factorial(n) + log_odd_double_factorial(odd);
        }
        c[n] = std::exp(log_c);
    }
    return c;
}

}  // namespace

double triple_coefficient(Family family, unsigned k, unsigned l, unsigned m) {
    return static_cast<double>(triple_coefficient_ld(family, k, l, m));
}

std::vector<double> inversion_coefficients(Family family, unsigned k) {
    const auto ld = inversion_coefficients_ld(family, k);
    return {ld.begin(), ld.end()};
}

std::vector<LinearizationTerm> linearize_product(Family family, unsigned k, unsigned l) {
    std::vector<LinearizationTerm> terms;
    for (unsigned m = k > l ? k - l : l - k; m <= k + l; m += 2)
        terms.push_back({m, triple_coefficient(family, k, l, m)});
    return terms;
}

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

/// (2j-1)!! from the factorial table.
Wide odd_double_factorial(const std::vector<Wide>& f, std::int64_t odd) {
    const auto j = static_cast<std::size_t>((odd + 1) / 2);
    return f[2 * j] / (boost::multiprecision::pow(Wide(2), static_cast<int>(j)) * f[j]);
}

Wide wide_triple(Family family, const std::vector<Wide>& f, unsigned k, unsigned l, unsigned m) {
    if (!selection_rules(k, l, m)) return Wide(0);
    sort3(k, l, m);
    const std::size_t g = (std::size_t{k} + l + m) / 2;
    if (family == Family::Legendre) {
        const Wide ratio = f[g] / (f[g - k] * f[g - l] * f[g - m]);
        const Wide w = f[2 * g - 2 * k] * f[2 * g - 2 * l] * f[2 * g - 2 * m] / f[2 * g + 1] * ratio * ratio;
        return sqrt(Wide(2 * k + 1) * (2 * l + 1) * (2 * m + 1)) * w;
    }
    return sqrt(f[k] * f[l] * f[m]) / (f[g - k] * f[g - l] * f[g - m]);
}

Wide wide_inversion(Family family, const std::vector<Wide>& f, unsigned k, unsigned n) {
    const auto odd = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(n) - 1;
    const Wide c = f[k] / f[k - n] * odd_double_factorial(f, odd);
    if (family == Family::Legendre)
        return c * sqrt(Wide(2 * n + 1)) / odd_double_factorial(f, static_cast<std::int64_t>(k) + n + 1);
    return c / sqrt(f[n]);
}

}  // namespace

KMatrix build_k_matrix(Family family, unsigned k, std::size_t dim) {
    if (dim == 0) throw DimensionError("K matrix dimension must be positive");
    KMatrix out{family, k, BandedSymmetric(dim, k)};
    // Entries are summed in 50 digits and rounded once, so closed forms come out correctly rounded.
    std::vector<Wide> f(2 * (dim + k) + 4);
    f[0] = 1;
    for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * static_cast<unsigned>(i);
    std::vector<Wide> c(k + 1);
    for (unsigned n = k % 2; n <= k; n += 2) c[n] = wide_inversion(family, f, k, n);
    for (std::size_t l = 0; l < dim; ++l) {
        const std::size_t last = std::min(dim - 1, l + k);
        // Entries with l + m + k odd vanish by parity.
        for (std::size_t m = l + (k % 2); m <= last; m += 2) {
            Wide sum = 0;
            for (unsigned n = static_cast<unsigned>(m - l); n <= k; n += 2)
                sum += c[n] * wide_triple(family, f, static_cast<unsigned>(l), static_cast<unsigned>(m), n);
            out.bands.set(l, m, static_cast<double>(sum));
        }
    }
    return out;
}

}  // namespace smm
