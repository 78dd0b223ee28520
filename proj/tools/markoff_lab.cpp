#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "markoff/identity.hpp"
#include "markoff/markoff_map.hpp"
#include "svg_render.hpp"

using json = nlohmann::ordered_json;
using namespace markoff;

namespace {

// exit codes: 0 verified, 2 identity inapplicable, 3 inconclusive,
// 64 usage, 65 invalid input, 66 unwritable output
enum ExitCode { kOk = 0, kInapplicable = 2, kInconclusive = 3, kUsage = 64,
                kBadInput = 65, kBadOutput = 66 };

struct UsageError : Error {
    using Error::Error;
};

// complex literals: a+bi with no spaces ("3", "2i", "-i", "1.5-2e-3i")
complexd parse_complex(const std::string& s) {
    if (s.empty()) throw UsageError("empty complex literal");
    std::string body = s;
    bool has_i = body.back() == 'i' || body.back() == 'I';
    if (!has_i) {
        char* end = nullptr;
        double re = std::strtod(body.c_str(), &end);
        if (end != body.c_str() + body.size())
            throw UsageError("bad complex literal: " + s);
        return {re, 0.0};
    }
    body.pop_back(); // strip i
    // find the split between real and imaginary parts: the last +/- that is
    // not an exponent sign and not leading
    int split = -1;
    for (int i = (int)body.size() - 1; i > 0; --i) {
        char c = body[i];
        if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    auto parse_d = [&](const std::string& t, double dflt) -> double {
        if (t.empty() || t == "+") return dflt;
        if (t == "-") return -dflt;
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size()) throw UsageError("bad complex literal: " + s);
        return v;
    };
    if (split < 0) return {0.0, parse_d(body, 1.0)};
    double re = parse_d(body.substr(0, split), 0.0);
    double im = parse_d(body.substr(split), 1.0);
    return {re, im};
}

std::vector<complexd> parse_complex_list(const std::string& s, std::size_t n) {
    std::vector<complexd> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_complex(tok));
    if (n && out.size() != n)
        throw UsageError("expected " + std::to_string(n) + " comma-separated values");
    return out;
}

FareyFraction parse_fraction(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos)
            return FareyFraction::make(std::stoll(s), 1);
        return FareyFraction::make(std::stoll(s.substr(0, slash)),
                                   std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw UsageError("bad fraction: " + s);
    }
}

struct Config {
    std::string seed_str, gen_a, gen_b;
    double tol = 1e-6;
    long long max_fib = 30;
    long long node_cap = 1'000'000;
    std::string out_path;
    std::string format; // default per command

    void validate() const {
        if (!(tol > 0)) throw UsageError("tolerance must be positive");
        if (max_fib < 1 || node_cap < 1) throw UsageError("budgets must be positive");
    }

    SearchBudget budget() const { return {max_fib, node_cap}; }

    MuMarkoffMap map() const {
        if (!seed_str.empty() && (!gen_a.empty() || !gen_b.empty()))
            throw UsageError("give either --seed or --gen-a/--gen-b, not both");
        if (!seed_str.empty()) {
            auto v = parse_complex_list(seed_str, 3);
            return MuMarkoffMap::from_triple(v[0], v[1], v[2]);
        }
        if (!gen_a.empty() && !gen_b.empty()) {
            auto a = parse_complex_list(gen_a, 4);
            auto b = parse_complex_list(gen_b, 4);
            return MuMarkoffMap::from_generators({a[0], a[1], a[2], a[3]},
                                                 {b[0], b[1], b[2], b[3]});
        }
        throw UsageError("a seed triple (--seed x,y,z) or generators are required");
    }

    json echo(const std::string& command) const {
        json c;
        c["command"] = command;
        c["tol"] = tol;
        c["max_fib"] = max_fib;
        c["node_cap"] = node_cap;
        return c;
    }
};

json complex_json(complexd v) { return json::array({v.real(), v.imag()}); }

json seed_json(const MuMarkoffMap& m) {
    return json::array(
        {complex_json(m.seed_x()), complex_json(m.seed_y()), complex_json(m.seed_z())});
}

json witnesses_json(const std::vector<RegionValue>& ws) {
    json arr = json::array();
    for (const auto& w : ws) {
        json o;
        o["p"] = w.region.p;
        o["q"] = w.region.q;
        o["re"] = w.value.real();
        o["im"] = w.value.imag();
        arr.push_back(o);
    }
    return arr;
}

json sum_report_json(const std::string& command, const Config& cfg,
                     const MuMarkoffMap& m, const SumReport& rep) {
    json o;
    o["command"] = command;
    o["seed"] = seed_json(m);
    o["mu"] = complex_json(m.mu());
    o["value_re"] = rep.value.real();
    o["value_im"] = rep.value.imag();
    o["target_re"] = rep.target.real();
    o["target_im"] = rep.target.imag();
    o["residual"] = rep.residual;
    o["tail_bound"] = rep.tail_bound;
    o["levels"] = rep.levels_used;
    o["regions"] = rep.regions_summed;
    o["converged"] = rep.converged;
    o["classification"] = "";
    o["witnesses"] = json::array();
    o["config"] = cfg.echo(command);
    return o;
}

int emit(const json& o, const Config& cfg) {
    std::string text = o.dump(2);
    text += "\n";
    if (cfg.out_path.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) return kBadOutput;
    f << text;
    return f ? kOk : kBadOutput;
}

int emit_text(const std::string& text, const Config& cfg) {
    if (cfg.out_path.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) return kBadOutput;
    f << text;
    return f ? kOk : kBadOutput;
}

int run_eval(const Config& cfg, const std::string& at) {
    MuMarkoffMap m = cfg.map();
    FareyFraction r = parse_fraction(at);
    complexd v = m.eval(r);
    json o;
    o["command"] = "eval";
    o["seed"] = seed_json(m);
    o["mu"] = complex_json(m.mu());
    o["region"] = {{"p", r.p}, {"q", r.q}};
    o["value_re"] = v.real();
    o["value_im"] = v.imag();
    o["abs"] = std::abs(v);
    o["fib"] = fib(r);
    o["config"] = cfg.echo("eval");
    return emit(o, cfg);
}

int run_omega(const Config& cfg, const std::string& window_str) {
    MuMarkoffMap m = cfg.map();
    Arc window = Arc::whole();
    if (!window_str.empty()) {
        auto comma = window_str.find(',');
        if (comma == std::string::npos) throw UsageError("--window wants lo,hi");
        window = Arc{parse_fraction(window_str.substr(0, comma)),
                     parse_fraction(window_str.substr(comma + 1)), false};
    }
    std::vector<RegionValue> rows;
    for (long long n = 1; n <= cfg.max_fib; ++n)
        for (const auto& r : regions_at_level(n, window))
            rows.push_back({r, m.eval(r)});

    if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& rv : rows) {
            json o;
            o["p"] = rv.region.p;
            o["q"] = rv.region.q;
            o["re"] = rv.value.real();
            o["im"] = rv.value.imag();
            o["abs"] = std::abs(rv.value);
            o["fib"] = fib(rv.region);
            arr.push_back(o);
        }
        json o;
        o["command"] = "omega";
        o["seed"] = seed_json(m);
        o["mu"] = complex_json(m.mu());
        o["regions"] = arr;
        o["config"] = cfg.echo("omega");
        return emit(o, cfg);
    }
    std::string csv = "p,q,re,im,abs,fib\n";
    char buf[256];
    for (const auto& rv : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g,%.17g,%lld\n",
                      rv.region.p, rv.region.q, rv.value.real(), rv.value.imag(),
                      std::abs(rv.value), fib(rv.region));
        csv += buf;
    }
    return emit_text(csv, cfg);
}

int run_bq(const Config& cfg) {
    MuMarkoffMap m = cfg.map();
    BQReport rep = bq_classify(m, cfg.budget());
    json o;
    o["command"] = "bq";
    o["seed"] = seed_json(m);
    o["mu"] = complex_json(m.mu());
    o["classification"] = to_string(rep.classification);
    o["witnesses"] = witnesses_json(rep.witnesses);
    o["omega2"] = witnesses_json(rep.omega2);
    o["scan_complete"] = rep.scan_complete;
    o["config"] = cfg.echo("bq");
    int rc = emit(o, cfg);
    if (rc != kOk) return rc;
    switch (rep.classification) {
        case BQReport::Class::BQ:
        case BQReport::Class::ExtendedBQ: return kOk;
        case BQReport::Class::ViolatesOpenInterval: return kInapplicable;
        case BQReport::Class::Inconclusive: return kInconclusive;
    }
    return kOk;
}

int run_sum(const Config& cfg) {
    MuMarkoffMap m = cfg.map();
    SumReport rep = mcshane_sum(m, cfg.tol, cfg.budget());
    int rc = emit(sum_report_json("sum", cfg, m, rep), cfg);
    if (rc != kOk) return rc;
    return rep.converged && rep.residual <= cfg.tol ? kOk : kInconclusive;
}

int run_quotient(const Config& cfg, long long p, long long q, const std::string& y0s,
                 int ratio_sign) {
    auto [m, spec] = invariant_map(p, q, parse_complex(y0s), ratio_sign);
    SumReport rep = quotient_sum(spec, m, cfg.tol, cfg.budget());
    json o = sum_report_json("quotient", cfg, m, rep);
    o["p"] = spec.p;
    o["q"] = spec.q;
    o["period"] = spec.period;
    o["ratio_sign"] = spec.ratio_sign;
    int rc = emit(o, cfg);
    if (rc != kOk) return rc;
    return rep.converged && rep.residual <= cfg.tol ? kOk : kInconclusive;
}

int run_fan_period(const Config& cfg, long long p, long long q, const std::string& y0s,
                   int ratio_sign) {
    auto [m, spec] = invariant_map(p, q, parse_complex(y0s), ratio_sign);
    CylinderValue v = psi_fan_period_sum(spec, m);
    double residual = m.params().mu_zero
                          ? std::abs(v.as_complex())
                          : residue_distance(v.as_complex(), complexd{0, 0});
    json o;
    o["command"] = "fan-period";
    o["seed"] = seed_json(m);
    o["mu"] = complex_json(m.mu());
    o["p"] = spec.p;
    o["q"] = spec.q;
    o["period"] = spec.period;
    o["value_re"] = v.re;
    o["value_im"] = v.im;
    o["target_re"] = 0.0;
    o["target_im"] = 0.0;
    o["residual"] = residual;
    o["config"] = cfg.echo("fan-period");
    int rc = emit(o, cfg);
    if (rc != kOk) return rc;
    return residual <= cfg.tol ? kOk : kInconclusive;
}

int run_asymptotic(const Config& cfg, const std::string& Ns_str, int kmax) {
    MuMarkoffMap m = cfg.map();
    std::vector<long long> Ns;
    std::stringstream ss(Ns_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) Ns.push_back(std::stoll(tok));
    AsymptoticReport rep = asymptotic_report(m, Ns, kmax, cfg.tol, cfg.budget());
    json o;
    o["command"] = "asymptotic";
    o["seed"] = seed_json(m);
    o["mu"] = complex_json(m.mu());
    o["theta"] = rep.theta;
    o["case_two"] = rep.case_two;
    json scan = json::array();
    for (const auto& pt : rep.scan) {
        json e;
        e["N"] = pt.N;
        e["re"] = pt.S.real();
        e["im"] = pt.S.imag();
        e["re_over_N"] = pt.re_over_N;
        scan.push_back(e);
    }
    o["scan"] = scan;
    json sub = json::array();
    for (const auto& pt : rep.subsequence) {
        json e;
        e["N"] = pt.N;
        e["re"] = pt.S_reduced.real();
        e["im"] = pt.S_reduced.imag();
        e["residue"] = pt.residue;
        sub.push_back(e);
    }
    o["subsequence"] = sub;
    o["regions"] = rep.regions_summed;
    o["converged"] = rep.converged;
    o["config"] = cfg.echo("asymptotic");
    int rc = emit(o, cfg);
    if (rc != kOk) return rc;
    bool pass = rep.converged;
    if (!rep.subsequence.empty())
        pass = pass && rep.subsequence.back().residue <= cfg.tol;
    return pass ? kOk : kInconclusive;
}

int run_checks(const Config& cfg) {
    MuMarkoffMap m = cfg.map();
    Triangle base = base_triangle();
    json results = json::array();
    bool all_ok = true;
    auto add = [&](const std::string& name, const CheckResult& r) {
        json o;
        o["name"] = name;
        o["value_re"] = r.value.real();
        o["value_im"] = r.value.imag();
        o["target_re"] = r.target.real();
        o["target_im"] = r.target.imag();
        o["residual"] = r.residual;
        o["ok"] = r.ok;
        results.push_back(o);
        all_ok = all_ok && r.ok;
    };
    static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    static constexpr int opp[3] = {2, 1, 0};
    for (int e = 0; e < 3; ++e) {
        TreeEdge te = TreeEdge::make(base.r[ends[e][0]], base.r[ends[e][1]]);
        DirectedEdge de = DirectedEdge::make(te, base.r[opp[e]]);
        add("psi_reciprocity/base_edge_" + std::to_string(e),
            psi_reciprocity(m, de, cfg.tol));
    }
    add("triple_psi/base_vertex", triple_psi(m, base, cfg.tol));
    add("circular_sum/base_vertex",
        circular_sum_check(m, SubtreeSpec::vertex(base), cfg.tol));
    add("circular_sum/base_edge",
        circular_sum_check(
            m, SubtreeSpec::from_edges({TreeEdge::make(base.r[0], base.r[1])}),
            cfg.tol));
    json o;
    o["command"] = "checks";
    o["seed"] = seed_json(m);
    o["mu"] = complex_json(m.mu());
    o["results"] = results;
    o["all_ok"] = all_ok;
    o["config"] = cfg.echo("checks");
    int rc = emit(o, cfg);
    if (rc != kOk) return rc;
    return all_ok ? kOk : kInconclusive;
}

int run_svg(const Config& cfg, long long depth, const std::string& window_str,
            double cap) {
    MuMarkoffMap m = cfg.map();
    FareyFraction lo{0, 1}, hi{1, 1};
    if (!window_str.empty()) {
        auto comma = window_str.find(',');
        if (comma == std::string::npos) throw UsageError("--window wants lo,hi");
        lo = parse_fraction(window_str.substr(0, comma));
        hi = parse_fraction(window_str.substr(comma + 1));
    }
    std::string svg = markoff_lab::render_svg(m, depth, lo, hi, cap);
    return emit_text(svg, cfg);
}

int fail_json(const std::string& command, const std::string& message, int code) {
    json o;
    o["command"] = command;
    o["error"] = message;
    o["exit"] = code;
    std::cout << o.dump(2) << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Markoff maps and McShane-type identity checks"};
    app.require_subcommand(1);

    Config cfg;
    std::string at, window, Ns = "10,100,1000", y0s = "2";
    long long depth = 8, pq_p = 2, pq_q = 1;
    int kmax = 6, ratio_sign = 1;
    double cap = 10.0;

    auto add_common = [&](CLI::App* sub, bool needs_seed) {
        if (needs_seed) {
            sub->add_option("--seed", cfg.seed_str, "seed triple x,y,z (a+bi literals)");
            sub->add_option("--gen-a", cfg.gen_a, "generator A as a,b,c,d");
            sub->add_option("--gen-b", cfg.gen_b, "generator B as a,b,c,d");
        }
        sub->add_option("--tol", cfg.tol, "verification tolerance");
        sub->add_option("--max-fib", cfg.max_fib, "fib-level budget");
        sub->add_option("--node-cap", cfg.node_cap, "search node budget");
        sub->add_option("--out", cfg.out_path, "output path (default stdout)");
        sub->add_option("--format", cfg.format, "json|csv|svg");
    };

    auto* c_eval = app.add_subcommand("eval", "evaluate phi at a region");
    add_common(c_eval, true);
    c_eval->add_option("--at", at, "region p/q")->required();

    auto* c_omega = app.add_subcommand("omega", "region census dump (CSV)");
    add_common(c_omega, true);
    c_omega->add_option("--window", window, "window lo,hi");

    auto* c_bq = app.add_subcommand("bq", "BQ-condition classification");
    add_common(c_bq, true);

    auto* c_sum = app.add_subcommand("sum", "McShane sum");
    add_common(c_sum, true);

    auto* c_quot = app.add_subcommand("quotient", "parabolic quotient sum");
    add_common(c_quot, false);
    c_quot->add_option("--p", pq_p)->required();
    c_quot->add_option("--q", pq_q)->required();
    c_quot->add_option("--y0", y0s)->required();
    c_quot->add_option("--ratio-sign", ratio_sign);

    auto* c_fan = app.add_subcommand("fan-period", "Lemma-level fan period psi sum");
    add_common(c_fan, false);
    c_fan->add_option("--p", pq_p)->required();
    c_fan->add_option("--q", pq_q)->required();
    c_fan->add_option("--y0", y0s)->required();
    c_fan->add_option("--ratio-sign", ratio_sign);

    auto* c_asym = app.add_subcommand("asymptotic", "Theorem-D asymptotic averages");
    add_common(c_asym, true);
    c_asym->add_option("--N", Ns, "comma-separated N list");
    c_asym->add_option("--kmax", kmax, "number of subsequence points");

    auto* c_checks = app.add_subcommand("checks", "lemma-level identity checks");
    add_common(c_checks, true);

    auto* c_svg = app.add_subcommand("svg", "Farey tessellation picture");
    add_common(c_svg, true);
    c_svg->add_option("--depth", depth, "max fib level");
    c_svg->add_option("--window", window, "window lo,hi (finite)");
    c_svg->add_option("--cap", cap, "log-modulus color cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    std::string command = app.get_subcommands().front()->get_name();
    try {
        cfg.validate();
        if (c_eval->parsed()) return run_eval(cfg, at);
        if (c_omega->parsed()) return run_omega(cfg, window);
        if (c_bq->parsed()) return run_bq(cfg);
        if (c_sum->parsed()) return run_sum(cfg);
        if (c_quot->parsed()) return run_quotient(cfg, pq_p, pq_q, y0s, ratio_sign);
        if (c_fan->parsed()) return run_fan_period(cfg, pq_p, pq_q, y0s, ratio_sign);
        if (c_asym->parsed()) return run_asymptotic(cfg, Ns, kmax);
        if (c_checks->parsed()) return run_checks(cfg);
        if (c_svg->parsed()) return run_svg(cfg, depth, window, cap);
        return kUsage;
    } catch (const UsageError& e) {
        return fail_json(command, e.what(), kUsage);
    } catch (const IdentityInapplicableError& e) {
        json o;
        o["command"] = command;
        o["error"] = e.what();
        o["witnesses"] = witnesses_json(e.witnesses);
        o["exit"] = kInapplicable;
        std::cout << o.dump(2) << "\n";
        return kInapplicable;
    } catch (const InconclusiveError& e) {
        return fail_json(command, e.what(), kInconclusive);
    } catch (const ReducibleCaseError& e) {
        return fail_json(command, e.what(), kBadInput);
    } catch (const PreconditionError& e) {
        return fail_json(command, e.what(), kBadInput);
    } catch (const DomainError& e) {
        return fail_json(command, e.what(), kBadInput);
    } catch (const SingularArgumentError& e) {
        return fail_json(command, e.what(), kBadInput);
    } catch (const DecompositionError& e) {
        return fail_json(command, e.what(), kBadInput);
    } catch (const Error& e) {
        return fail_json(command, e.what(), kBadInput);
    }
}
