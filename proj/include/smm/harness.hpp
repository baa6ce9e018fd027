/**
 * @file harness.hpp
 * @brief Benchmarks, staged sGFEM experiments, rate tables and run manifests.
 *
 * All CSV and JSON outputs print floats with 17 significant digits and are
 * reproducible byte for byte, except for the wall-clock columns of the bench
 * CSV.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smm/index_set.hpp"
#include "smm/sgfem.hpp"

namespace smm::harness {

inline constexpr const char* kVersion = "1.0.0";

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

/// %.17g, with "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double value);

/// Collects output files, writes them under one directory and finishes with
/// manifest.json listing every file and its hash.
class OutputWriter {
public:
    explicit OutputWriter(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    const std::map<std::string, std::string>& files() const noexcept { return hashes_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// config_text is hashed as given; callers pass a canonical dump.
    void write_manifest(const std::string& command, const std::string& config_text, std::uint64_t seed);

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> hashes_;
};

// ---- neighbour-construction benchmark

struct BenchRecord {
    std::string set_family = "isoTD";
    std::uint32_t M = 0;
    std::uint32_t p = 0;
    std::uint32_t K = 0;
    std::size_t cardinality = 0;
    std::size_t weight_count = 0;  ///< |W_Xi|, the union of the weight sets
    std::size_t weight_total = 0;  ///< sum over Xi of |W(mu)|
    double wall_time_seconds = 0.0;
    std::size_t locate_steps = 0;
    double fitted_epsilon = 0.0;   ///< per (M, p) sweep; NaN if too few timed points
    double step_epsilon = 0.0;     ///< same fit on locate_steps / |W_Xi|
};

struct BenchConfig {
    std::vector<std::uint32_t> Ms{2, 4, 6};
    std::vector<std::uint32_t> ps{2, 4, 6};
    /// Largest K per M; M values not listed use default_k_max.
    std::map<std::uint32_t, std::uint32_t> k_max{{2, 200}, {4, 30}, {6, 16}};
    std::uint32_t default_k_max = 10;
    /// Median of up to `repeats` timed runs; repeating stops once repeat_seconds have been measured.
    std::size_t repeats = 5;
    double repeat_seconds = 2.0;
    double min_seconds = 0.01;
    unsigned threads = 1;
};

struct EpsilonFit {
    double epsilon = 0.0;
    double step_epsilon = 0.0;
    std::size_t points = 0;
};

/// Slope of log(time) against log(|Lambda|) minus one over records slower
/// than min_seconds. Throws InsufficientDataError with fewer than 4 points.
EpsilonFit fit_epsilon(const std::vector<BenchRecord>& sweep, double min_seconds);

/// One record per (M, p, K), K = 1..k_max. `progress` receives one line per record.
std::vector<BenchRecord> run_bench(const BenchConfig& config, std::ostream* progress = nullptr);
std::string bench_csv(const std::vector<BenchRecord>& records);

// ---- staged experiment

struct SetChoice {
    SetFamily family = SetFamily::IsoTD;
    double degree = 0.0;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DiffusionSpec diffusion;
    std::size_t elements = 20;
    std::size_t order = 4;
    std::size_t quadrature_points = 14;
    /// Families isoTD / isoTP with integer degrees.
    std::map<SetFamily, std::vector<std::uint32_t>> iso_sweeps;
    /// Families aTD / aTP with real degrees, built with the estimated weights.
    std::map<SetFamily, std::vector<double>> aniso_sweeps;
    std::optional<SetChoice> weight_source;
    std::vector<double> given_weights;  ///< used when weight_source is empty
    /// Empty: closed-form statistics (space-independent coefficient only).
    std::optional<SetChoice> reference;
    std::optional<SetChoice> best_m_source;
    std::vector<std::size_t> best_m_sizes;
    std::size_t rate_first = 1;
    std::size_t rate_last = 100;
};

/// Throws ConfigError on malformed input or an empty sweep list.
ExperimentConfig parse_experiment_config(const std::string& json_text);
/// Canonical JSON of the parsed config (stable key order), used for hashing.
std::string canonical_config(const ExperimentConfig& config);

struct ConvergenceRow {
    std::string family;
    double parameter = 0.0;
    std::size_t cardinality = 0;
    double mean_error_pct = 0.0;
    double variance_error_pct = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;
};

struct ExperimentResult {
    std::vector<ConvergenceRow> rows;
    std::vector<double> weights;
    double rate = 0.0;
    /// Last row of each family (the largest set it reached).
    std::map<std::string, ConvergenceRow> final_rows;
};

/// Runs iso sweeps, weight estimation, anisotropic sweeps and best-M
/// selection. Writes convergence.csv, coeff_norms.csv and weights.json when
/// `out` is given. Solver failures propagate as NumericalError.
ExperimentResult run_experiment(const ExperimentConfig& config, const SolverOptions& solver,
                                OutputWriter* out = nullptr, std::ostream* progress = nullptr);

// ---- convergence-rate table

struct RateConfig {
    std::vector<std::uint32_t> Ms{2, 4, 6, 8};
    std::vector<double> ss{2, 4, 6, 8};
    std::vector<std::uint32_t> ps{1, 2, 3};
    SpatialForm spatial = SpatialForm::Sinusoidal;
    std::size_t min_cardinality = 3000;  ///< smallest isoTD(M, r) strictly larger than this
    std::size_t first = 10;
    std::size_t last = 100;
};

struct RateRecord {
    std::uint32_t M = 0;
    double s = 0.0;
    std::uint32_t p = 0;
    std::uint32_t degree = 0;
    std::size_t cardinality = 0;
    double rate = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;
};

RateRecord rate_entry(std::uint32_t M, double s, std::uint32_t p, const RateConfig& config,
                      const SolverOptions& solver);
std::vector<RateRecord> run_rates(const RateConfig& config, const SolverOptions& solver,
                                  std::ostream* progress = nullptr);
std::string rates_csv(const std::vector<RateRecord>& records);

/// Smallest K with |isoTD(M, K)| > n.
std::uint32_t smallest_td_degree_above(std::uint32_t M, std::size_t n);

}  // namespace smm::harness
