#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "smm/harness.hpp"

using namespace smm;
using namespace smm::harness;

namespace {

ExperimentResult run_config(const std::string& file) {
    std::ifstream is(std::string(SMM_SOURCE_DIR) + "/configs/" + file);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    SolverOptions solver;
    solver.threads = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
    return run_experiment(parse_experiment_config(os.str()), solver);
}

// For every row of `family` inside [lo, hi], the largest aTD set that is no
// bigger must have a smaller mean error.
void check_atd_beats(const ExperimentResult& result, const std::string& family, std::size_t lo,
                     std::size_t hi) {
    for (const auto& row : result.rows) {
        if (row.family != family || row.cardinality < lo || row.cardinality > hi) continue;
        const ConvergenceRow* best = nullptr;
        for (const auto& atd : result.rows)
            if (atd.family == "aTD" && atd.cardinality <= row.cardinality &&
                (!best || atd.cardinality > best->cardinality))
                best = &atd;
        REQUIRE(best);
        INFO(family << " |Lambda|=" << row.cardinality << " vs aTD |Lambda|=" << best->cardinality);
        CHECK(best->mean_error_pct < row.mean_error_pct);
    }
}

}  // namespace

TEST_CASE("example 2 (scaled reference)") {
    const ExperimentResult result = run_config("example2.json");
    const std::vector<double> g{2.40, 4.17, 5.37, 6.38};
    REQUIRE(result.weights.size() == g.size());
    for (std::size_t m = 0; m < g.size(); ++m) CHECK(std::abs(result.weights[m] - g[m]) < 0.25);
    CHECK(std::abs(result.rate - 2.03) < 0.3);
    check_atd_beats(result, "isoTP", 50, 1000);
    CHECK(result.final_rows.at("bestM").mean_error_pct < result.final_rows.at("isoTP").mean_error_pct);
}

TEST_CASE("example 3 (scaled reference)") {
    const ExperimentResult result = run_config("example3.json");
    const std::vector<double> g{1.52, 3.56, 4.95, 5.76, 6.4, 6.85};
    REQUIRE(result.weights.size() == g.size());
    for (std::size_t m = 0; m < g.size(); ++m) CHECK(std::abs(result.weights[m] - g[m]) < 0.25);
    CHECK(std::abs(result.rate - 1.43) < 0.3);
    for (const char* family : {"aTP", "isoTD", "isoTP"}) check_atd_beats(result, family, 50, 1000);
}
