// gspec: command-line front end for the membership rules, witnesses, oracle dumps and suites.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gspec/suites.hpp"

namespace {

using gspec::json;

// Tolerance overrides read from the environment. A --config file still wins over these.
constexpr std::pair<const char*, const char*> kEnvTolerances[] = {
    {"GSPEC_EQ_TOL", "eq_tol"},
    {"GSPEC_BOUNDARY_BAND", "boundary_band"},
    {"GSPEC_ORACLE_SV_TOL", "oracle_sv_tol"},
};

// Raw overrides only: validation waits until the config file has had its say, so a file can
// repair an inconsistent environment.
json env_tolerances() {
    json j = json::object();
    for (const auto& [var, field] : kEnvTolerances) {
        const char* raw = std::getenv(var);
        if (raw == nullptr || *raw == '\0')
            continue;
        char* end = nullptr;
        const double v = std::strtod(raw, &end);
        if (end == raw || *end != '\0')
            throw gspec::Error(gspec::ErrorCode::ConfigError, std::string(var) + " is not a number: " + raw);
        j[field] = v;
    }
    return j;
}

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in)
        throw gspec::Error(gspec::ErrorCode::ConfigError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw gspec::Error(gspec::ErrorCode::ConfigError, what + " is not valid JSON: " + e.what());
    }
}

// A document argument is either inline JSON, "-" for stdin, or a file path.
json load_document(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{')
        return parse_json_text(arg, "inline document");
    return parse_json_text(slurp(arg), arg);
}

struct Options {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string scale = "small";
    std::string json_path;
    std::string document;
    std::vector<std::string> suites;
    bool list = false;
};

void write_output(const Options& o, const std::string& text) {
    std::cout << text << '\n';
    if (o.json_path.empty())
        return;
    std::ofstream out(o.json_path);
    if (!out)
        throw gspec::Error(gspec::ErrorCode::ConfigError, "cannot write " + o.json_path);
    out << text << '\n';
}

std::optional<json> config_file(const Options& o) {
    if (o.config_path.empty())
        return std::nullopt;
    json j = parse_json_text(slurp(o.config_path), o.config_path);
    if (!j.is_object())
        throw gspec::Error(gspec::ErrorCode::ConfigError, "config file must hold a JSON object");
    return j;
}

// Environment values overlaid by the tolerance fields of the config file.
gspec::ToleranceConfig base_tolerances(const std::optional<json>& file) {
    json merged = env_tolerances();
    if (file)
        for (const auto& [var, field] : kEnvTolerances)
            if (file->contains(field))
                merged[field] = file->at(field);
    return gspec::tolerances_from_json(merged, {});
}

gspec::QueryDocument prepare(const Options& o, bool seed_given) {
    const std::optional<json> file = config_file(o);
    gspec::QueryDocument doc = gspec::parse_query(load_document(o.document), base_tolerances(file));
    if (seed_given)
        doc.config.seed = o.seed;
    if (file)
        doc.config = gspec::apply_config(*file, doc.config);
    return doc;
}

int emit(const Options& o, const gspec::Outcome& out) {
    write_output(o, out.report.dump(2));
    return out.exit_code;
}

int run_verify(const Options& o) {
    if (o.list) {
        for (const std::string& name : gspec::suite_names())
            std::cout << name << "  " << gspec::suite_summary(name) << '\n';
        return 0;
    }
    const gspec::ToleranceConfig tol = base_tolerances(config_file(o));
    const gspec::Scale scale = gspec::scale_from_name(o.scale);
    std::vector<std::string> names = o.suites;
    if (names.empty() || (names.size() == 1 && names.front() == "all"))
        names = gspec::suite_names();
    // Unknown names are rejected before any suite spends time.
    for (const std::string& n : names)
        (void)gspec::suite_summary(n);

    json reports = json::array();
    bool ok = true;
    for (const std::string& n : names) {
        const gspec::SuiteResult r = gspec::run_suite(n, o.seed, scale, tol);
        ok = ok && r.passed();
        std::cerr << (r.passed() ? "PASS " : "FAIL ") << n << "  cases=" << r.cases << " failures=" << r.failures.size()
                  << " time=" << r.wall_seconds << "s\n";
        reports.push_back(gspec::suite_result_to_json(r, true));
    }
    write_output(o, (reports.size() == 1 ? reports.front() : reports).dump(2));
    return ok ? 0 : gspec::kSuiteFailedExit;
}

json csv_to_json(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    json out = {{"header", json::array()}, {"rows", json::array()}};
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream cells(line);
        std::string cell;
        json row = json::array();
        while (std::getline(cells, cell, ','))
            row.push_back(header ? json(cell) : json(std::stod(cell)));
        if (header)
            out["header"] = row;
        else
            out["rows"].push_back(row);
        header = false;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized spectra of module operators: membership rules, witnesses and oracle checks"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "JSON file with tolerances and truncation settings; overrides everything else");
    app.add_option("--seed", o.seed, "Seed for suites and randomized searches");
    app.add_option("--scale", o.scale, "Suite scale")->check(CLI::IsMember({"small", "full"}));
    app.add_option("--json", o.json_path, "Also write the report to this path");

    auto* check = app.add_subcommand("check", "Decide membership for a query document");
    check->add_option("document", o.document, "Document file, '-' for stdin, or inline JSON")->required();
    auto* witness = app.add_subcommand("witness", "Produce and verify a witness for a query document");
    witness->add_option("document", o.document, "Document file, '-' for stdin, or inline JSON")->required();
    auto* verify = app.add_subcommand("verify", "Run named verification suites ('all' for every suite)");
    verify->add_option("suites", o.suites, "Suite names");
    verify->add_flag("--list", o.list, "List the suites and exit");
    auto* dump = app.add_subcommand("oracle-dump", "Per-depth smallest singular values as CSV");
    dump->add_option("document", o.document, "Document file, '-' for stdin, or inline JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gspec::exit_code_for(gspec::ErrorCode::ConfigError);
    }
    const bool seed_given = app.count("--seed") > 0;

    try {
        if (*check)
            return emit(o, gspec::run_check(prepare(o, seed_given)));
        if (*witness)
            return emit(o, gspec::run_witness(prepare(o, seed_given)));
        if (*verify)
            return run_verify(o);
        if (*dump) {
            const std::string csv = gspec::oracle_dump_csv(prepare(o, seed_given));
            std::cout << csv;
            if (!o.json_path.empty()) {
                std::ofstream out(o.json_path);
                out << csv_to_json(csv).dump(2) << '\n';
            }
            return 0;
        }
    } catch (const gspec::Error& e) {
        const json report = gspec::error_to_json(e);
        std::cerr << e.what() << '\n';
        try {
            write_output(o, report.dump(2));
        } catch (const gspec::Error&) {
        }
        return gspec::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return gspec::exit_code_for(gspec::ErrorCode::EvalError);
    }
    return 0;
}
