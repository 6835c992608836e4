// wachlab CLI: parse spec/family JSON, run the pipelines, emit deterministic
// machine-readable reports.
//
//   wachlab polygon     --in spec.json [--out report.json]
//   wachlab irreducible --in spec.json
//   wachlab lift        --in spec.json --prec-pi 16
//   wachlab reduce      --in spec.json --prec-pi 16
//   wachlab family      --in family.json --p 3 --a 2 --f 2 --prec-p 8 --prec-pi 16
//   wachlab equiv       --in pair.json --prec-p 2
//   wachlab selftest
//
// Exit codes: 0 success, 1 malformed input, 2 typed mathematical failure
// (precision exhaustion, non-separable roots, weight preconditions, Unknown).
// Reports are byte-identical across runs; timings go to stderr (or into the
// report with --timing, which is then not byte-stable).

#include "wachlab/acceptance.hpp"
#include "wachlab/json_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>

namespace {

using wachlab::json;

json read_input(const std::string& path) {
    if (path.empty()) throw wachlab::input_error("no input (--in FILE)");
    std::ifstream in(path);
    if (!in) throw wachlab::input_error("cannot open input file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw wachlab::input_error(std::string("malformed JSON: ") + e.what());
    }
    return j;
}

struct Options {
    long long p = 0;
    int a = 0, f = 0, d = 0;
    int prec_p = 8, prec_pi = 16;
    std::string in_path, out_path;
    int jobs = 1;
    bool timing = false;
};

wachlab::FieldCtxPtr ctx_for(const Options& opt, const json& input) {
    if (input.contains("ctx")) {
        json c = input["ctx"];
        if (opt.prec_p > 0 && !c.contains("N")) c["N"] = opt.prec_p;
        return wachlab::ctx_from_json(c);
    }
    if (opt.p == 0) throw wachlab::input_error("no ctx in input and no --p given");
    int a = opt.a > 0 ? opt.a : 1;
    int f = opt.f > 0 ? opt.f : a;
    return wachlab::make_field(opt.p, a, f, opt.prec_p);
}

json run_one(const std::string& cmd, const json& input, const Options& opt);

json run_command(const std::string& cmd, const json& input, const Options& opt) {
    if (input.is_object() && input.contains("batch")) {
        const auto& items = input["batch"];
        std::vector<json> results(items.size());
        if (opt.jobs > 1) {
            std::vector<std::future<json>> futs;
            for (size_t i = 0; i < items.size(); ++i)
                futs.push_back(std::async(std::launch::async, [&, i] { return run_one(cmd, items[i], opt); }));
            for (size_t i = 0; i < items.size(); ++i) results[i] = futs[i].get();
        } else {
            for (size_t i = 0; i < items.size(); ++i) results[i] = run_one(cmd, items[i], opt);
        }
        json out;
        out["command"] = cmd;
        out["batch"] = results;
        return out;
    }
    return run_one(cmd, input, opt);
}

json run_one(const std::string& cmd, const json& input, const Options& opt) {
    using namespace wachlab;
    json report;
    report["command"] = cmd;
    report["input"] = input;

    if (cmd == "polygon") {
        RepSpec s = spec_from_json(input);
        report["precision"] = {{"N", s.ctx->N}};
        report["sigma_np"] = polygon_to_json(sigma_np(s));
        auto [tH, tN] = t_invariants(s);
        report["t_H"] = json::array({tH.num, tH.den});
        report["t_N"] = json::array({tN.num, tN.den});
        report["phi_power_hodge"] = polygon_to_json(matrix_hodge(phi_power(s, 0)));
    } else if (cmd == "irreducible") {
        RepSpec s = spec_from_json(input);
        report["precision"] = {{"N", s.ctx->N}};
        report["result"] = verdict_to_json(is_irreducible(s));
    } else if (cmd == "lift") {
        RepSpec s = spec_from_json(input);
        WachModule W = fl_lift(s, opt.prec_pi);
        report["precision"] = {{"N", s.ctx->N}, {"M", opt.prec_pi}};
        report["result"] = wach_to_json(W);
    } else if (cmd == "reduce") {
        RepSpec s = spec_from_json(input);
        report["precision"] = {{"N", s.ctx->N}, {"M", opt.prec_pi}};
        WachModule W = fl_lift(s, opt.prec_pi);
        ModPModule N = reduce(W);
        DetCharacter dc = det_character(N);
        report["det_character"] = {{"h", dc.h}, {"k_vals", dc.kvals}};
        if (s.d == 2) report["label"] = label_to_json(classify_dim2(N));
        report["residual_report"] = wach_to_json(W)["residual_report"];
    } else if (cmd == "family") {
        auto ctx = ctx_for(opt, input);
        FamilySpec fs = family_from_json(input, ctx);
        FamilyWach fw = family_wach(fs, opt.prec_pi);
        report["precision"] = {{"N", ctx->N}, {"M", opt.prec_pi}};
        report["delta"] = fw.dz.delta;
        report["mod_pi_spec"] = spec_to_json(fw.mod_pi_spec);
        report["wach"] = wach_to_json(fw.W);
        ModPModule N = reduce(fw.W);
        report["label"] = label_to_json(classify_dim2(N, fs));
        auto prime = prime_leading_solvable(N);
        if (prime.has_value()) report["prime_leading_solvable"] = *prime;
        if (!fw.flags.empty()) report["flags"] = fw.flags;
    } else if (cmd == "equiv") {
        RepSpec s1 = spec_from_json(input.at("s1"));
        RepSpec s2 = spec_from_json(input.at("s2"), s1.ctx);
        int n = input.contains("n") ? input["n"].get<int>() : opt.prec_p;
        auto w = equiv_search(s1, s2, n);
        report["precision"] = {{"n", n}};
        if (w) {
            json C = json::array();
            for (const auto& m : w->C) C.push_back(mat_to_json(m));
            report["result"] = {{"found", true}, {"C", C}};
        } else {
            report["result"] = {{"found", false}};
        }
    } else {
        throw input_error("unknown command: " + cmd);
    }
    return report;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wachlab: exact-arithmetic crystalline representation toolkit"};
    app.require_subcommand(1);

    Options opt;
    std::string cmd;
    for (const char* name : {"polygon", "irreducible", "lift", "reduce", "family", "equiv", "selftest"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--p", opt.p, "prime p");
        sub->add_option("--a", opt.a, "degree of K over Q_p");
        sub->add_option("--f", opt.f, "degree of E over Q_p (default a)");
        sub->add_option("--d", opt.d, "dimension");
        sub->add_option("--prec-p", opt.prec_p, "p-adic working precision N");
        sub->add_option("--prec-pi", opt.prec_pi, "pi-adic working precision M");
        sub->add_option("--in", opt.in_path, "input JSON file");
        sub->add_option("--out", opt.out_path, "output JSON file (default stdout)");
        sub->add_option("--jobs", opt.jobs, "parallel batch items");
        sub->add_flag("--timing", opt.timing, "embed timing in the report (not byte-stable)");
        sub->callback([&cmd, name] { cmd = name; });
    }

    CLI11_PARSE(app, argc, argv);

    auto t0 = std::chrono::steady_clock::now();
    try {
        json report;
        if (cmd == "selftest") {
            auto results = wachlab::acceptance::run_all();
            bool all = true;
            json arr = json::array();
            for (const auto& r : results) {
                std::fprintf(stderr, "[%s] criterion %d (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", r.index,
                             r.seconds, r.detail.c_str());
                arr.push_back({{"criterion", r.index}, {"pass", r.pass}, {"detail", r.detail}});
                all = all && r.pass;
            }
            report["command"] = "selftest";
            report["result"] = arr;
            report["pass"] = all;
            if (!all) {
                std::cout << report.dump(2) << std::endl;
                return 2;
            }
        } else {
            json input = read_input(opt.in_path);
            report = run_command(cmd, input, opt);
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (opt.timing) report["timing_s"] = secs;
        std::fprintf(stderr, "wachlab %s: %.3f s\n", cmd.c_str(), secs);
        if (!opt.out_path.empty()) {
            std::ofstream out(opt.out_path);
            out << report.dump(2) << std::endl;
        } else {
            std::cout << report.dump(2) << std::endl;
        }
        return 0;
    } catch (const wachlab::input_error& e) {
        std::cerr << "input error: " << e.what() << std::endl;
        return 1;
    } catch (const wachlab::math_error& e) {
        std::cerr << "math error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
