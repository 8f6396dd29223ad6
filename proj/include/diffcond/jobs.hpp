#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diffmod.hpp"
#include "extensions.hpp"
#include "parse.hpp"
#include "random.hpp"
#include "suite.hpp"
#include "tate.hpp"
#include "thickening.hpp"

namespace diffcond {

using json = nlohmann::json;

struct PrecisionProfile {
    int N = 8;
    int s_window = 64;
    int delta_degree = 2;
    int n_max = 12;
};

struct JobSpec {
    std::string kind;
    int p = 2;
    std::vector<std::string> residue_vars;
    PrecisionProfile precision;
    std::uint64_t seed = 0;
    json payload = json::object();
};

inline const std::vector<std::string>& job_kinds() {
    static const std::vector<std::string> k = {"conductor",        "compare",     "groebner", "idempotent",
                                               "thickening-check", "as-ts-check", "suite"};
    return k;
}

inline json rat(const Rational& q, bool certified = true) {
    return json{{"value", to_string(q)}, {"certified", certified}};
}
inline json rat(const Val& v, bool certified = true) { return json{{"value", v.str()}, {"certified", certified}}; }

namespace detail {

inline int get_int(const json& j, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
        Rational r = parse_rational(v.get<std::string>());
        if (r.denominator() == 1) return static_cast<int>(r.numerator());
    }
    throw error(errc::parse_error, std::string("field '") + key + "' must be an integer");
}

inline std::string get_str(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw error(errc::parse_error, std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

inline std::vector<std::string> get_strs(const json& j, const char* key, bool required = true) {
    if (!j.contains(key)) {
        if (required) throw error(errc::parse_error, std::string("missing list field '") + key + "'");
        return {};
    }
    const json& v = j.at(key);
    if (!v.is_array()) throw error(errc::parse_error, std::string("field '") + key + "' must be a list");
    std::vector<std::string> out;
    for (const auto& x : v) {
        if (!x.is_string()) throw error(errc::parse_error, std::string("entries of '") + key + "' must be strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

inline std::vector<Rational> get_rats(const json& j, const char* key) {
    std::vector<Rational> out;
    for (const auto& s : get_strs(j, key, false)) out.push_back(parse_rational(s));
    return out;
}

inline json rats(const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(to_string(q));
    return a;
}

inline json ints(const std::set<int>& s) {
    json a = json::array();
    for (int x : s) a.push_back(x);
    return a;
}

}  // namespace detail

inline JobSpec parse_job(const json& doc) {
    if (!doc.is_object()) throw error(errc::parse_error, "job document must be an object");
    JobSpec s;
    s.kind = detail::get_str(doc, "kind");
    if (std::find(job_kinds().begin(), job_kinds().end(), s.kind) == job_kinds().end())
        throw error(errc::parse_error, "unknown job kind '" + s.kind + "'");
    s.p = detail::get_int(doc, "p", 2);
    if (!is_prime(s.p)) throw error(errc::parse_error, "p must be prime");
    if (doc.contains("residue_vars")) {
        if (doc.at("residue_vars").is_number_integer()) {
            s.residue_vars = KappaCtx(s.p, doc.at("residue_vars").get<int>()).names;
        } else {
            s.residue_vars = detail::get_strs(doc, "residue_vars");
        }
    } else if (s.kind != "suite" && s.kind != "as-ts-check") {
        s.residue_vars = {"b"};
    }
    if (doc.contains("precision")) {
        const json& pr = doc.at("precision");
        if (!pr.is_object()) throw error(errc::parse_error, "precision must be an object");
        s.precision.N = detail::get_int(pr, "N", s.precision.N);
        s.precision.s_window = detail::get_int(pr, "s_window", s.precision.s_window);
        s.precision.delta_degree = detail::get_int(pr, "delta_degree", s.precision.delta_degree);
        s.precision.n_max = detail::get_int(pr, "n_max", s.precision.n_max);
    }
    if (s.precision.N < 1 || s.precision.s_window < 1 || s.precision.delta_degree < 1 || s.precision.n_max < 1)
        throw error(errc::parse_error, "precision fields must be positive");
    if (doc.contains("seed")) {
        const json& v = doc.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw error(errc::parse_error, "seed must be an integer");
        s.seed = v.get<std::uint64_t>();
    }
    if (doc.contains("payload")) s.payload = doc.at("payload");
    if (!s.payload.is_object()) throw error(errc::parse_error, "payload must be an object");
    return s;
}

inline json job_echo(const JobSpec& s) {
    return json{{"kind", s.kind},
                {"p", s.p},
                {"residue_vars", s.residue_vars},
                {"precision",
                 {{"N", s.precision.N},
                  {"s_window", s.precision.s_window},
                  {"delta_degree", s.precision.delta_degree},
                  {"n_max", s.precision.n_max}}},
                {"seed", s.seed},
                {"payload", s.payload}};
}

struct RunOptions {
    bool mutate_rotate = false;
};

// A flat batch row: (f, swan, artin, oracle, verdict).
struct CsvRow {
    std::string f, swan, artin, oracle, verdict;
};

struct Report {
    json doc;
    std::vector<CsvRow> rows;
    bool pass = false;
};

namespace detail {

struct Env {
    JobSpec spec;
    KappaCtx k;
    CohenCtx c;
    Window w;
};

inline Env make_env(const JobSpec& s) {
    Env e{s, KappaCtx(s.p, s.residue_vars), {}, {-s.precision.s_window, s.precision.s_window}};
    e.c = CohenCtx(s.p, s.precision.N, e.k);
    return e;
}

inline json break_json(const DiffModule& M, bool log, int n_max) {
    BreakData b = break_data(M, log, n_max);
    return json{{"value", to_string(b.value)},
                {"certified", true},
                {"dominant", ints(b.dominant)},
                {"per_piece", rats(b.per_piece)},
                {"c_cert", to_string(b.c_cert)}};
}

inline json datum_json(const ASWData& f, const Env& e) {
    ASReduction red = as_reduce(f, e.w.hi);
    return json{{"input", f.str()},
                {"reduced", red.reduced.str()},
                {"witness", red.witness.str()},
                {"witness_verified", verify_witness(f, red)}};
}

inline ASWData reduced(const ASWData& f, const Env& e) { return as_reduce(f, e.w.hi).reduced; }

inline Report run_conductor(const Env& e) {
    Report rep;
    const std::string ftxt = get_str(e.spec.payload, "f");
    ASWData f = reduced(parse_datum(ftxt, e.k), e);
    DiffModule M = as_module(f, e.c, e.w);
    int oracle_swan = kato_swan(f), oracle_artin = kato_artin(f);
    json res;
    res["datum"] = datum_json(parse_datum(ftxt, e.k), e);
    if (e.spec.payload.contains("combine")) {
        const json& cb = e.spec.payload.at("combine");
        const std::string how = get_str(cb, "kind");
        const std::string gtxt = get_str(cb, "with");
        ASWData g = reduced(parse_datum(gtxt, e.k), e);
        DiffModule Mg = as_module(g, e.c, e.w);
        if (how == "direct_sum") {
            M = combine(M, Mg, CombineKind::direct_sum);
            oracle_swan += kato_swan(g);
            oracle_artin += kato_artin(g);
        } else if (how == "tensor") {
            M = combine(M, Mg, CombineKind::tensor);
            oracle_swan = kato_swan(reduced(f + g, e));
            oracle_artin = kato_artin(reduced(f + g, e));
        } else {
            throw error(errc::parse_error, "combine kind must be direct_sum or tensor");
        }
        res["combine"] = json{{"kind", how}, {"with", datum_json(parse_datum(gtxt, e.k), e)}};
    }
    const int n_max = e.spec.precision.n_max;
    Conductors cd = conductors(M, n_max);
    res["rank"] = M.rank;
    res["swan"] = rat(cd.swan);
    res["artin"] = rat(cd.artin);
    res["breaks"] = json{{"nonlog", break_json(M, false, n_max)}, {"log", break_json(M, true, n_max)}};
    res["oracle"] = json{{"kato_swan", oracle_swan}, {"kato_artin", oracle_artin}};
    rep.pass = cd.swan == Rational(oracle_swan) && cd.artin == Rational(oracle_artin);
    rep.doc = res;
    rep.rows.push_back({ftxt, to_string(cd.swan), to_string(cd.artin), std::to_string(oracle_swan),
                        rep.pass ? "PASS" : "FAIL"});
    return rep;
}

inline Report run_compare(const Env& e) {
    Report rep;
    std::vector<std::string> data = get_strs(e.spec.payload, "data", false);
    const int count = get_int(e.spec.payload, "count", 0);
    if (data.empty() && count <= 0) throw error(errc::parse_error, "compare needs 'data' or a positive 'count'");
    DataGen gen(e.spec.seed);
    for (int i = 0; i < count; ++i) data.push_back(gen.datum(e.k).str());
    json rows = json::array();
    rep.pass = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
        json row{{"id", i}, {"f", data[i]}};
        CsvRow csv{data[i], "", "", "", "FAIL"};
        try {
            ASWData f = reduced(parse_datum(data[i], e.k), e);
            Conductors cd = conductors(as_module(f, e.c, e.w), e.spec.precision.n_max);
            const int os = kato_swan(f);
            const bool ok = cd.swan == Rational(os) && cd.artin == Rational(kato_artin(f));
            row["reduced"] = f.str();
            row["swan"] = rat(cd.swan);
            row["artin"] = rat(cd.artin);
            row["oracle"] = json{{"kato_swan", os}, {"kato_artin", kato_artin(f)}};
            row["verdict"] = ok ? "PASS" : "FAIL";
            csv = {data[i], to_string(cd.swan), to_string(cd.artin), std::to_string(os), ok ? "PASS" : "FAIL"};
            rep.pass = rep.pass && ok;
        } catch (const error& ex) {
            if (ex.code() == errc::parse_error) throw;
            row["error"] = ex.what();
            row["verdict"] = "FAIL";
            rep.pass = false;
        }
        rows.push_back(row);
        rep.rows.push_back(csv);
    }
    rep.doc = json{{"rows", rows}};
    return rep;
}

inline Report run_groebner(const Env& e) {
    Report rep;
    const int n = get_int(e.spec.payload, "n", 1);
    const int prec = get_int(e.spec.payload, "s_precision", 64);
    std::vector<KappaSeries> gens;
    for (const auto& t : get_strs(e.spec.payload, "generators")) gens.push_back(parse_kappa_series(t, e.k, n, prec));
    GroebnerBasis B = groebner(gens);
    const auto un = u_names(n);
    json basis = json::array(), leads = json::array();
    for (std::size_t i = 0; i < B.gens.size(); ++i) {
        basis.push_back(B.gens[i].str(un));
        leads.push_back(B.leads[i]);
    }
    json divs = json::array();
    rep.pass = true;
    for (const auto& t : get_strs(e.spec.payload, "divide", false)) {
        KappaSeries f = parse_kappa_series(t, e.k, n, prec);
        DivResult<ResidueElem> d = divide_kappa(f, B);
        KappaSeries back = d.remainder;
        json qs = json::array();
        for (std::size_t i = 0; i < d.quotients.size(); ++i) {
            back = back + d.quotients[i] * B.gens[i];
            qs.push_back(d.quotients[i].str(un));
        }
        const bool identity = back.equals_at_precision(f);
        bool irreducible = true;
        for (const auto& [key, a] : d.remainder.terms())
            if (find_divisor(B.leads, key_u(key)) >= 0) irreducible = false;
        rep.pass = rep.pass && identity && irreducible;
        divs.push_back(json{{"f", t},
                            {"quotients", qs},
                            {"remainder", d.remainder.str(un)},
                            {"identity", identity},
                            {"irreducible", irreducible}});
    }
    rep.doc = json{{"basis", basis}, {"leads", leads}, {"j_I", B.j_I}, {"s_precision", B.prec()}, {"divisions", divs}};
    return rep;
}

inline Report run_idempotent(const Env& e) {
    Report rep;
    const int n = get_int(e.spec.payload, "n", 1);
    const int prec = get_int(e.spec.payload, "s_precision", 64);
    std::vector<LiftSeries> rels;
    for (const auto& t : get_strs(e.spec.payload, "relations")) rels.push_back(parse_lift_series(t, e.c, n, prec));
    LiftedIdeal I = make_lifted_ideal(rels);
    SplitAlgebra A = split_components(I.basis);
    const auto un = u_names(n);
    const std::size_t k = A.fundamental.size();
    json ids = json::array();
    if (k < 16) {
        for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
            KappaSeries s(e.k, n, prec);
            for (std::size_t i = 0; i < k; ++i)
                if (mask & (std::size_t(1) << i)) s = s + A.fundamental[i];
            ids.push_back(divide_kappa(s, I.basis).remainder.str(un));
        }
    }
    json lifts = json::array();
    std::vector<LiftSeries> es;
    for (std::size_t i = 0; i < k; ++i) {
        IdempotentLift L = lift_idempotent(A.fundamental[i], I, e.c);
        es.push_back(L.e);
        json tr = json::array();
        for (const auto& v : L.trace) tr.push_back(v.str());
        json pt = A.points[i];
        lifts.push_back(json{{"point", pt}, {"residue", A.fundamental[i].str(un)}, {"lift", L.e.str(un)}, {"trace", tr}});
    }
    bool orthogonal = true;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (!divide_lift(es[i] * es[j], I).remainder.is_zero()) orthogonal = false;
    LiftSeries sum(e.c, n, prec);
    for (const auto& x : es) sum = sum + x;
    const LiftSeries one = LiftSeries::constant(CohenElem::from_int(1, e.c), n, prec);
    const bool sums_to_one = k > 0 && divide_lift(sum - one, I).remainder.is_zero();
    rep.pass = orthogonal && sums_to_one;
    rep.doc = json{{"components", k},
                   {"idempotents", ids},
                   {"lifted", lifts},
                   {"orthogonal", orthogonal},
                   {"sum_to_one", sums_to_one},
                   {"basis", [&] {
                        json b = json::array();
                        for (const auto& g : I.basis.gens) b.push_back(g.str(un));
                        return b;
                    }()}};
    return rep;
}

inline Report run_thickening(const Env& e) {
    Report rep;
    ASWData f = reduced(parse_datum(get_str(e.spec.payload, "f"), e.k), e);
    DiffModule M = as_module(f, e.c, e.w);
    const int n_max = e.spec.precision.n_max;
    const int D = std::max(e.spec.precision.delta_degree, n_max);
    rep.pass = true;
    json res;
    for (bool log : {false, true}) {
        BreakData bd = break_data(M, log, n_max);
        Rational cand = bd.value;
        const char* key = log ? "log" : "nonlog";
        if (e.spec.payload.contains("candidate")) cand = parse_rational(get_str(e.spec.payload.at("candidate"), key));
        HarnessReport h = break_triviality_harness(M, cand, log, get_rats(e.spec.payload, "levels"));
        json rows = json::array();
        for (const auto& r : h.rows)
            rows.push_back(json{{"a", to_string(r.a)}, {"trivial", r.trivial}, {"expected", r.expected}});
        json grid = json::array();
        if (e.spec.payload.contains("grid")) {
            for (const auto& g : e.spec.payload.at("grid")) {
                const Rational a = parse_rational(get_str(g, "a")), c = parse_rational(get_str(g, "c"));
                const int j = get_int(g, "j", 0);
                if (j < 0 || j >= static_cast<int>(M.N.size()))
                    throw error(errc::parse_error, "grid operator index out of range");
                const Rational formula = thick_spectral_valuation(M, a, c, j, log, n_max);
                const Rational direct = thick_dn_estimate(M, a, c, j, log, n_max, D);
                const bool ok = formula == direct;
                rep.pass = rep.pass && ok;
                grid.push_back(json{{"a", to_string(a)},
                                    {"c", to_string(c)},
                                    {"j", j},
                                    {"formula", rat(formula)},
                                    {"recursion", rat(direct)},
                                    {"agree", ok}});
            }
        }
        rep.pass = rep.pass && h.pass;
        res[key] = json{{"break", rat(bd.value)},
                        {"candidate", to_string(cand)},
                        {"c", to_string(h.c)},
                        {"harness", rows},
                        {"harness_pass", h.pass},
                        {"grid", grid}};
    }
    rep.doc = res;
    return rep;
}

inline json as_ts_json(const ASTSReport& r) {
    auto flags = [](const std::vector<bool>& v) {
        json a = json::array();
        for (bool b : v) a.push_back(b);
        return a;
    };
    return json{{"a", to_string(r.a)},
                {"log", r.log},
                {"A_residue", r.A_residue},
                {"A_invertible_residue", r.A_invertible_residue},
                {"A_invertible_full", r.A_invertible_full},
                {"chi1_norm", r.chi1_norm},
                {"chi1_norm_ok", flags(r.chi1_norm_ok)},
                {"chi2_norm", r.chi2_norm},
                {"chi2_norm_ok", flags(r.chi2_norm_ok)},
                {"iterations", r.iterations},
                {"update_valuations", rats(r.update_valuations)},
                {"contraction", r.contraction},
                {"chi2_kills_relations", r.chi2_kills_relations},
                {"roundtrip_delta", flags(r.roundtrip_delta)},
                {"roundtrip_v", flags(r.roundtrip_v)},
                {"pass", r.pass}};
}

inline Report run_as_ts(const Env& e) {
    Report rep;
    const PresentationTemplate t = parse_template(get_str(e.spec.payload, "template"));
    const int N = get_int(e.spec.payload, "N", 3);
    Presentation pr = standard_presentation(t, e.spec.p, N);
    std::vector<Rational> nl = get_rats(e.spec.payload, "levels"), lg = get_rats(e.spec.payload, "log_levels");
    if (!e.spec.payload.contains("levels")) nl = {Rational(2), Rational(5, 2), Rational(3)};
    if (!e.spec.payload.contains("log_levels")) lg = {Rational(1), Rational(3, 2)};
    json checks = json::array();
    rep.pass = check_presentation(pr);
    for (bool log : {false, true})
        for (const auto& a : log ? lg : nl) {
            ASTSReport r = as_ts_isomorphism_check(pr, a, log, N, e.spec.precision.s_window,
                                                   e.spec.precision.delta_degree);
            rep.pass = rep.pass && r.pass;
            checks.push_back(as_ts_json(r));
        }
    json rels = json::array();
    for (std::size_t h = 0; h < pr.rel.size(); ++h) rels.push_back(pr.str(static_cast<int>(h)));
    rep.doc = json{{"template", template_name(t)},
                   {"relations", rels},
                   {"e", pr.e},
                   {"r", pr.r},
                   {"presentation_ok", check_presentation(pr)},
                   {"checks", checks}};
    return rep;
}

inline Report run_suite_job(const Env& e, const RunOptions& opt) {
    Report rep;
    const int size = get_int(e.spec.payload, "size", 200);
    bool mutate = opt.mutate_rotate;
    if (e.spec.payload.contains("mutate")) {
        const std::string m = get_str(e.spec.payload, "mutate");
        if (m != "rotate-sign") throw error(errc::parse_error, "unknown mutation '" + m + "'");
        mutate = true;
    }
    SuiteReport s = run_suite(e.spec.seed, size, mutate, e.spec.precision.N);
    json groups = json::array();
    for (const auto& g : s.groups)
        groups.push_back(json{{"name", g.name},
                              {"checked", g.checked},
                              {"failures", g.failures},
                              {"verdict", g.pass() ? "PASS" : "FAIL"}});
    json cases = json::array();
    for (const auto& c : s.cases) {
        cases.push_back(json{{"id", c.id},
                             {"p", c.p},
                             {"m", c.m},
                             {"f", c.f},
                             {"reduced", c.reduced},
                             {"swan", rat(c.swan)},
                             {"artin", rat(c.artin)},
                             {"oracle", {{"kato_swan", c.oracle_swan}, {"kato_artin", c.oracle_artin}}},
                             {"verdict", c.pass ? "PASS" : "FAIL"},
                             {"note", c.note}});
        rep.rows.push_back({c.f, to_string(c.swan), to_string(c.artin), std::to_string(c.oracle_swan),
                            c.pass ? "PASS" : "FAIL"});
    }
    rep.pass = s.pass();
    rep.doc = json{{"size", s.size}, {"mutate_rotate", s.mutate_rotate}, {"groups", groups}, {"cases", cases}};
    return rep;
}

}  // namespace detail

// Throws diffcond::error; ParseError means a malformed job.
inline Report run(const JobSpec& spec, const RunOptions& opt = {}) {
    const detail::Env e = detail::make_env(spec);
    Report r;
    if (spec.kind == "conductor") r = detail::run_conductor(e);
    else if (spec.kind == "compare") r = detail::run_compare(e);
    else if (spec.kind == "groebner") r = detail::run_groebner(e);
    else if (spec.kind == "idempotent") r = detail::run_idempotent(e);
    else if (spec.kind == "thickening-check") r = detail::run_thickening(e);
    else if (spec.kind == "as-ts-check") r = detail::run_as_ts(e);
    else if (spec.kind == "suite") r = detail::run_suite_job(e, opt);
    else throw error(errc::parse_error, "unknown job kind '" + spec.kind + "'");
    r.doc = json{{"job", job_echo(spec)}, {"results", r.doc}, {"verdict", r.pass ? "PASS" : "FAIL"}};
    return r;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

inline std::string to_csv(const Report& r) {
    std::ostringstream os;
    os << "f,swan,artin,oracle,verdict\n";
    for (const auto& x : r.rows)
        os << csv_field(x.f) << ',' << x.swan << ',' << x.artin << ',' << x.oracle << ',' << x.verdict << '\n';
    return os.str();
}

}  // namespace diffcond
