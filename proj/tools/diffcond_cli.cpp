#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <diffcond/jobs.hpp>

using namespace diffcond;

namespace {

struct Args {
    std::string input, output, format = "report";
    std::optional<std::uint64_t> seed;
    std::optional<int> p, N, s_window, delta_degree, n_max, size;
    std::string f, tmpl, vars;
    std::string mutate;
    bool timing = false;
};

json load_doc(const Args& a, const std::string& kind) {
    json doc = json::object();
    if (!a.input.empty()) {
        std::ifstream in(a.input);
        if (!in) throw error(errc::parse_error, "cannot read '" + a.input + "'");
        try {
            doc = json::parse(in);
        } catch (const json::exception& ex) {
            throw error(errc::parse_error, std::string("malformed job document: ") + ex.what());
        }
        if (!doc.is_object()) throw error(errc::parse_error, "job document must be an object");
        if (doc.contains("kind") && doc["kind"] != kind)
            throw error(errc::parse_error, "job kind does not match the subcommand '" + kind + "'");
    }
    doc["kind"] = kind;
    if (a.p) doc["p"] = *a.p;
    if (a.seed) doc["seed"] = *a.seed;
    if (!a.vars.empty()) {
        json v = json::array();
        std::stringstream ss(a.vars);
        for (std::string t; std::getline(ss, t, ',');)
            if (!t.empty()) v.push_back(t);
        doc["residue_vars"] = v;
    }
    auto set_prec = [&](const char* key, const std::optional<int>& x) {
        if (x) doc["precision"][key] = *x;
    };
    set_prec("N", a.N);
    set_prec("s_window", a.s_window);
    set_prec("delta_degree", a.delta_degree);
    set_prec("n_max", a.n_max);
    if (!doc.contains("payload")) doc["payload"] = json::object();
    if (!a.f.empty()) doc["payload"]["f"] = a.f;
    if (!a.tmpl.empty()) doc["payload"]["template"] = a.tmpl;
    if (a.size) doc["payload"]["size"] = *a.size;
    if (!a.mutate.empty()) doc["payload"]["mutate"] = a.mutate;
    return doc;
}

void emit(const Args& a, const std::string& text) {
    if (a.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(a.output);
    if (!out) throw error(errc::parse_error, "cannot write '" + a.output + "'");
    out << text;
}

int execute(const Args& a, const std::string& kind) {
    try {
        const auto t0 = std::chrono::steady_clock::now();
        JobSpec spec = parse_job(load_doc(a, kind));
        Report r = run(spec);
        if (a.timing) {
            const auto ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
            r.doc["timing_ms"] = ms;
        }
        emit(a, a.format == "csv" ? to_csv(r) : r.doc.dump(2) + "\n");
        return r.pass ? 0 : 1;
    } catch (const error& ex) {
        std::cerr << ex.what() << "\n";
        return ex.code() == errc::parse_error ? 2 : 1;
    } catch (const std::exception& ex) {
        std::cerr << "ComputeError: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffcond: differential Artin and Swan conductors"};
    app.require_subcommand(1);
    Args a;
    for (const auto& kind : job_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, kind + " job");
        sub->add_option("--input", a.input, "job document (JSON)");
        sub->add_option("--output", a.output, "write the report here instead of stdout");
        sub->add_option("--format", a.format, "report or csv")->check(CLI::IsMember({"report", "csv"}));
        sub->add_option("--seed", a.seed, "seed for randomized jobs");
        sub->add_option("--p", a.p, "residue characteristic");
        sub->add_option("--vars", a.vars, "comma separated residue variable names");
        sub->add_option("--N", a.N, "p-adic precision");
        sub->add_option("--s-window", a.s_window, "S exponent window half-width");
        sub->add_option("--delta-degree", a.delta_degree, "delta degree bound");
        sub->add_option("--n-max", a.n_max, "derivative iterations");
        sub->add_flag("--timing", a.timing, "add wall time to the report");
        if (kind == "conductor" || kind == "thickening-check") sub->add_option("--f", a.f, "Artin-Schreier datum");
        if (kind == "as-ts-check") sub->add_option("--template", a.tmpl, "eisenstein, fierce or product");
        if (kind == "suite") {
            sub->add_option("--size", a.size, "number of random data");
            sub->add_option("--mutate", a.mutate, "inject a known defect")->check(CLI::IsMember({"rotate-sign"}));
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (const auto& kind : job_kinds())
        if (app.got_subcommand(kind)) return execute(a, kind);
    return 2;
}
