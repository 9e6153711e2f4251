#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "gspec/expression.hpp"
#include "gspec/suites.hpp"

using namespace gspec;
using namespace std::complex_literals;

namespace {

Outcome check(const json& doc) { return run_check(parse_query(doc)); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::EvalError;
}

// Scratch files live outside the source tree whatever the working directory.
std::string scratch(const std::string& name) {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / "gspec_cli_test";
        std::filesystem::create_directories(d);
        return d;
    }();
    return (dir / name).string();
}

struct Run {
    int exit_code = -1;
    std::string out;
};

// Runs the installed binary with a document written to a temporary file.
Run cli(const std::string& args, const std::string& env = "") {
    const std::string out_path = scratch("stdout.txt");
    const std::string cmd = env + " " + GSPEC_CLI_PATH + " " + args + " > " + out_path + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string write_doc(const std::string& name, const json& doc) {
    const std::string path = scratch(name);
    std::ofstream(path) << doc.dump();
    return path;
}

} // namespace

TEST_CASE("kind literals") {
    CHECK(kind_from_json("continuous(256)") == AlgebraKind::continuous(256));
    CHECK(kind_from_json("continuous(64,2)") == AlgebraKind::continuous(64, 2));
    CHECK(kind_from_json("step(64)") == AlgebraKind::step(64));
    CHECK(kind_from_json("matrix(2)") == AlgebraKind::matrix(2));
    CHECK(kind_from_json("scalar") == AlgebraKind::matrix(1));
    CHECK(kind_from_json(json{{"kind", "step"}, {"resolution", 8}, {"refinement", 2}}) == AlgebraKind::step(8, 2));
    for (const AlgebraKind& k : {AlgebraKind::continuous(17, 3), AlgebraKind::step(5), AlgebraKind::matrix(3)})
        CHECK(kind_from_json(kind_to_json(k)) == k);
    CHECK(code_of([] { (void)kind_from_json("banach(3)"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { (void)kind_from_json("step(x)"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { (void)kind_from_json(json::array()); }) == ErrorCode::ConfigError);
}

TEST_CASE("element literals") {
    const AlgebraKind k = AlgebraKind::continuous(16);
    CHECK(element_from_json("t + 0.5", k) == parse_expression("t + 0.5", k));
    CHECK(element_from_json(2.5, k) == constant(k, 2.5));
    CHECK(element_from_json(json{{"constant", json::array({0.0, 1.0})}}, k) == constant(k, 1i));
    const AlgebraKind m = AlgebraKind::matrix(2);
    const AlgebraElement t2 = element_from_json(json{{"matrix", {{0, json::array({0, 1})}, {json::array({0, 1}), json::array({0, 1})}}}}, m);
    CHECK(t2.matrix()(0, 1) == 1i);
    CHECK(t2.matrix()(0, 0) == cd(0.0));
    CHECK(code_of([&] { (void)element_from_json(json{{"values", {1, 2}}}, k); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] { (void)element_from_json(json{{"expr", "t"}, {"constant", 1}}, k); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] { (void)element_from_json("t +", k); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { (void)element_from_json(json{{"kind", "step"}, {"constant", 1}}, k); }) == ErrorCode::ConfigError);
}

TEST_CASE("literal round trips") {
    std::mt19937_64 rng(11);
    for (const AlgebraKind& k : {AlgebraKind::continuous(16, 2), AlgebraKind::step(8), AlgebraKind::matrix(3)}) {
        for (int i = 0; i < 20; ++i) {
            const AlgebraElement a = random_element(k, rng, 2.0);
            const json j = element_to_json(a);
            CHECK(element_from_json(json::parse(j.dump()), k) == a);
            const ModuleVector x = random_interior_vector(k, Indexing::natural(6), rng);
            CHECK(vector_from_json(json::parse(vector_to_json(x).dump()), k) == x);
        }
        const ModuleVector z = basis_vector(-2, k, Indexing::integers(3));
        CHECK(vector_from_json(vector_to_json(z), k) == z);
    }
    const AlgebraKind s = AlgebraKind::step(8);
    const std::vector<OperatorExpr> ops = {
        OperatorExpr::unilateral_shift(),
        adjoint(OperatorExpr::unilateral_shift()),
        OperatorExpr::weighted_shift({constant(s, 2.0), indicator(s, 0.0, 0.5)}),
        OperatorExpr::diagonal_unitary({constant(s, 1i), unit(s)}),
        OperatorExpr::block(indicator(s, 0.0, 0.5), OperatorExpr::scalar_mult(unit(s)), OperatorExpr::unilateral_shift()),
        OperatorExpr::negate(OperatorExpr::compose(OperatorExpr::dyadic_expand(), OperatorExpr::odd_compress())),
        OperatorExpr::sum(OperatorExpr::bilateral_shift(), OperatorExpr::scalar_mult(constant(s, 0.25))),
    };
    for (const OperatorExpr& op : ops)
        CHECK(operator_from_json(json::parse(operator_to_json(op).dump()), s) == op);
    CHECK(operator_from_json("S*", s) == adjoint(OperatorExpr::unilateral_shift()));
    CHECK(operator_from_json("Z", s) == OperatorExpr::dyadic_compress());
    CHECK(code_of([&] { (void)operator_from_json("Q", s); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] { (void)operator_from_json(json{{"node", "sum"}, {"args", {"S"}}}, s); }) == ErrorCode::ConfigError);
}

TEST_CASE("tolerance literals") {
    ToleranceConfig t = tolerances_from_json(json{{"eq_tol", 1e-10}}, {});
    CHECK(t.eq_tol == 1e-10);
    CHECK(t.boundary_band == ToleranceConfig{}.boundary_band);
    CHECK(tolerances_from_json(tolerances_to_json(t), {}).eq_tol == 1e-10);
    CHECK(code_of([] { (void)tolerances_from_json(json{{"eq_tol", -1}}, {}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { (void)tolerances_from_json(json{{"eq_tol", "x"}}, {}); }) == ErrorCode::ConfigError);
}

TEST_CASE("query documents") {
    const QueryDocument d = parse_query(json{{"element", "0.5"}});
    CHECK(d.kind == AlgebraKind::continuous(256));
    CHECK(d.question == "full");
    CHECK(d.op == OperatorExpr::unilateral_shift());
    const QueryDocument c = parse_query(json{{"algebra", "step(8)"},
                                             {"element", 1},
                                             {"config", {{"N", 32}, {"ladder", {8, 16, 32}}, {"eq_tol", 1e-11}}}});
    CHECK(c.config.depth == 32);
    CHECK(c.config.ladder == std::vector<int>{8, 16, 32});
    CHECK(c.config.tol.eq_tol == 1e-11);
    CHECK(code_of([] { (void)parse_query(json{{"operator", "S"}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { (void)parse_query(json{{"element", 1}, {"question", "why"}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { (void)parse_query(json{{"element", 1}, {"config", {{"ladder", {16, 32}}}}}); }) ==
          ErrorCode::ConfigError);
    CHECK(code_of([] { (void)parse_query(json{{"element", 1}, {"operator", "V"}, {"question", "commutative"}}); }) ==
          ErrorCode::ConfigError);
    // The file config wins over the document config.
    QueryConfig cfg = apply_config(json{{"eq_tol", 1e-12}, {"boundary_band", 1e-7}}, c.config);
    CHECK(cfg.tol.eq_tol == 1e-12);
    CHECK(cfg.depth == 32);
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(Membership::Out) == 0);
    CHECK(exit_code_for(Membership::In) == 1);
    CHECK(exit_code_for(Membership::BoundaryIndeterminate) == 2);
    CHECK(exit_code_for(Membership::Inconclusive) == 3);
    CHECK(exit_code_for(ErrorCode::ParseError) == 10);
    CHECK(exit_code_for(ErrorCode::ConfigError) == 11);
    CHECK(exit_code_for(ErrorCode::UnknownSuite) == 12);
    CHECK(exit_code_for(ErrorCode::NotApplicable) == 13);
    CHECK(exit_code_for(ErrorCode::WitnessCheckFailed) == 14);
    CHECK(exit_code_for(ErrorCode::ShapeMismatch) >= 20);
}

TEST_CASE("check routing") {
    const Outcome one = check(json{{"algebra", "continuous(256)"}, {"operator", "S"}, {"element", "1"}});
    CHECK(one.exit_code == 1);
    CHECK(one.report["verdict"]["membership"] == "In");
    CHECK(check(json{{"operator", "S"}, {"element", "2"}}).exit_code == 0);
    CHECK(check(json{{"algebra", "matrix(2)"}, {"operator", "S"}, {"element", 2}}).exit_code == 0);
    CHECK(check(json{{"algebra", "step(16)"}, {"operator", "V"}, {"element", 1}}).exit_code == 1);
    CHECK(check(json{{"algebra", "step(16)"}, {"operator", "Z"}, {"element", 0.5}, {"question", "point"}}).exit_code == 1);

    const Outcome cross = check(json{{"algebra", "step(8)"},
                                     {"operator", {{"node", "sum"}, {"args", {"S", "S*"}}}},
                                     {"element", 3},
                                     {"config", {{"cross_check", true}}}});
    CHECK(cross.exit_code == 0);
    CHECK(cross.report["oracle_agrees"] == true);

    const Outcome star = check(json{{"algebra", "step(8)"}, {"operator", "Z"}, {"element", {{"constant", json::array({0.3, 0.4})}}},
                                    {"question", "star-duality"}});
    CHECK(star.exit_code == 0);
    CHECK(star.report["holds"] == true);
}

TEST_CASE("witness routing") {
    const Outcome z = run_witness(parse_query(json{{"algebra", "step(8)"}, {"operator", "Z"}, {"element", "0.5"},
                                                   {"question", "kernel"}}));
    CHECK(z.report["certificate"]["type"] == "KernelWitness");
    CHECK(z.report["certificate"]["residual"].get<double>() <= 1e-8);
    CHECK(z.report["table"].size() > 3);
    const Outcome s = run_witness(parse_query(json{{"algebra", "step(8)"}, {"operator", "S"}, {"element", "0.5"},
                                                   {"question", "cokernel"}}));
    CHECK(s.report["certificate"]["type"] == "CokernelWitness");
    CHECK(s.report["table"][1]["norm"].get<double>() == doctest::Approx(0.5));
    CHECK(code_of([] {
              (void)run_witness(parse_query(json{{"operator", "S"}, {"element", "3"}, {"question", "cokernel"}}));
          }) == ErrorCode::NotApplicable);
}

TEST_CASE("oracle dump") {
    const std::string csv = oracle_dump_csv(parse_query(json{{"algebra", "scalar"}, {"operator", "S"}, {"element", 2}}));
    CHECK(csv.rfind("depth,section_sv_min,adjoint_section_sv_min,square_sv_min\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("suites API") {
    CHECK(suite_names().size() >= 10);
    CHECK(code_of([] { (void)run_suite("bogus", 1, Scale::Small); }) == ErrorCode::UnknownSuite);
    CHECK(code_of([] { (void)scale_from_name("huge"); }) == ErrorCode::ConfigError);
    const SuiteResult a = run_suite("mn-shift", 5, Scale::Small);
    const SuiteResult b = run_suite("mn-shift", 5, Scale::Small);
    CHECK(a.passed());
    CHECK(a.cases == 200);
    CHECK(suite_result_to_json(a).dump() == suite_result_to_json(b).dump());
    CHECK(run_suite("ex-m2-counterexample", 1, Scale::Small).passed());
}

TEST_CASE("command line") {
    const std::string s1 = write_doc("doc_s1.json", {{"algebra", "continuous(256)"}, {"operator", "S"}, {"element", "1"}});
    const Run in = cli("check " + s1);
    CHECK(in.exit_code == 1);
    CHECK(json::parse(in.out)["verdict"]["membership"] == "In");
    CHECK(cli("check '{\"operator\": \"S\", \"element\": \"2\"}'").exit_code == 0);

    const Run bad = cli("check '{\"operator\": \"S\", \"element\": \"t +\"}'");
    CHECK(bad.exit_code == 10);
    CHECK(json::parse(bad.out)["position"] == 3);

    CHECK(cli("witness '{\"operator\": \"S\", \"element\": \"3\", \"question\": \"cokernel\"}'").exit_code == 13);
    CHECK(cli("verify bogus").exit_code == 12);
    CHECK(cli("check " + scratch("missing_file.json")).exit_code == 11);
    CHECK(cli("check '{not json'").exit_code == 11);
    CHECK(cli("frobnicate").exit_code == 11);

    // Environment overrides apply, and a config file wins over them.
    CHECK(cli("check " + s1, "GSPEC_EQ_TOL=abc").exit_code == 11);
    CHECK(cli("check " + s1, "GSPEC_EQ_TOL=1e-3 GSPEC_BOUNDARY_BAND=1e-4").exit_code == 11);
    const std::string cfg = scratch("cfg_ok.json");
    std::ofstream(cfg) << R"({"eq_tol": 1e-10, "boundary_band": 1e-6})";
    CHECK(cli("--config " + cfg + " check " + s1, "GSPEC_EQ_TOL=1e-3 GSPEC_BOUNDARY_BAND=1e-4").exit_code == 1);

    const std::string out = scratch("verify_out.json");
    const Run v = cli("verify ex-m2-counterexample --seed 9 --json " + out);
    CHECK(v.exit_code == 0);
    std::ifstream written(out);
    const json report = json::parse(written);
    CHECK(report["suite"] == "ex-m2-counterexample");
    CHECK(report["seed"] == 9);
    CHECK(report["passed"] == true);

    const Run dump = cli("oracle-dump '{\"algebra\": \"scalar\", \"operator\": \"S\", \"element\": 2}'");
    CHECK(dump.exit_code == 0);
    CHECK(dump.out.rfind("depth,", 0) == 0);
}
