// Acceptance run: one PASS/FAIL line per criterion, each backed by one or more named suites.
// Exits 0 only when every criterion passes.

#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "gspec/suites.hpp"

namespace {

struct Criterion {
    const char* title;
    std::vector<std::string> suites;
};

const std::vector<Criterion> kCriteria = {
    {"scalar reduction to the classical shift spectra", {"scalar-reduction"}},
    {"unilateral shift rule, oracle agreement, cokernel witnesses, empty point spectrum", {"prop-shift"}},
    {"explicit resolvent solutions and divergence at the unit", {"lemma-resolvent"}},
    {"shift over matrix algebras against eigenvalue moduli", {"mn-shift"}},
    {"skew-part resolvent bound and the 2x2 counterexample", {"cor-skew-bound", "ex-m2-counterexample"}},
    {"self-adjoint envelope for diag(1 + t)", {"cor-envelope"}},
    {"expander and compressor family", {"ex-expanders"}},
    {"bilateral shift rule against solution-norm divergence", {"prop-bilateral"}},
    {"counterexample regressions",
     {"ex-star-transfer", "ex-sp-residual", "ex-nonorthogonal-kernels", "ex-diagonal-unitary"}},
    {"star duality on every implemented pair", {"star-duality"}},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gspec acceptance run"};
    std::uint64_t seed = 1;
    std::string scale_name = "small";
    app.add_option("--seed", seed, "base seed for every suite");
    app.add_option("--scale", scale_name, "small or full")->check(CLI::IsMember({"small", "full"}));
    CLI11_PARSE(app, argc, argv);
    const gspec::Scale scale = gspec::scale_from_name(scale_name);

    int failed = 0;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        const Criterion& c = kCriteria[i];
        bool ok = true;
        std::string detail;
        for (const std::string& name : c.suites) {
            const auto start = std::chrono::steady_clock::now();
            std::string note;
            try {
                const gspec::SuiteResult r = gspec::run_suite(name, seed, scale);
                ok = ok && r.passed();
                note = std::to_string(r.cases) + " cases";
                if (!r.failures.empty())
                    note += ", " + std::to_string(r.failures.size()) + " failed, first: " + r.failures.front().case_id +
                            ": " + r.failures.front().message;
            } catch (const std::exception& e) {
                ok = false;
                note = std::string("error: ") + e.what();
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1fs", secs);
            detail += (detail.empty() ? "" : "; ") + name + " " + note + " " + buf;
        }
        failed += ok ? 0 : 1;
        std::cout << (ok ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << c.title << "  (" << detail << ")" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << " (seed "
              << seed << ", scale " << scale_name << ")" << std::endl;
    return failed == 0 ? 0 : 1;
}
