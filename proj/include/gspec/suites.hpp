#pragma once

// Named verification suites. Each one draws random cases from a seed, runs a closed-form rule
// and an independent check on every case, and records the query document of any failing case
// so that it can be replayed with `gspec check`.

#include "gspec/query.hpp"

namespace gspec {

enum class Scale { Small, Full };

Scale scale_from_name(const std::string& name);
const char* scale_name(Scale s) noexcept;

struct SuiteFailure {
    std::string case_id;
    std::uint64_t seed = 0;
    std::string message;
    json query;
};

struct SuiteResult {
    std::string suite;
    std::uint64_t seed = 0;
    Scale scale = Scale::Small;
    int cases = 0;
    std::vector<SuiteFailure> failures;
    double wall_seconds = 0.0;

    bool passed() const noexcept { return cases > 0 && failures.empty(); }
};

const std::vector<std::string>& suite_names();
/// One-line description of what a suite checks.
std::string suite_summary(const std::string& name);

/// Raises UnknownSuite for names outside suite_names().
SuiteResult run_suite(const std::string& name, std::uint64_t seed, Scale scale, const ToleranceConfig& tol = {});

/// Wall time is left out unless asked for, so equal seeds give byte-identical reports.
json suite_result_to_json(const SuiteResult& r, bool with_time = false);

} // namespace gspec
