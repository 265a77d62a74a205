// frostlab: experiment orchestration for the delta-discretized geometry lab.
//
//   frostlab run <config>    execute the experiment described by a config file
//   frostlab gen ...         write a generated DeltaSet in the text format
//   frostlab verify <csv>    re-check the derived columns of an emitted CSV
//
// Exit codes: 0 all criteria pass, 1 a bound criterion failed, 2 config or
// I/O error. FROSTLAB_THREADS caps worker parallelism.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "frostlab.hpp"

namespace {

std::string schema_help() {
    std::string s;
    s += "CSV schemas emitted by experiments:\n";
    s += "  bound checks : " + frostlab::bound_report_csv_header() + "\n";
    s += "  furstenberg  : " + frostlab::furstenberg_csv_header() + "\n";
    s += "  sumproduct   : " + frostlab::sumproduct_csv_header() + "\n";
    s += "  gen          : kind,level,cells,audit_exponent,audit\n";
    return s;
}

int cmd_run(const std::string& config_path) {
    using clock = std::chrono::steady_clock;
    try {
        const auto cfg = frostlab::Config::parse_file(config_path);
        const std::string out_dir = cfg.get_or("experiment", "out_dir", "out");
        const auto seed =
            static_cast<std::uint64_t>(cfg.get_int_or("experiment", "seed", 0));
        const auto t0 = clock::now();
        const auto res = frostlab::run_experiment(cfg, out_dir);
        const double ms =
            std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        const auto paths = frostlab::emit_report(res, out_dir, seed, ms);
        for (const auto& c : res.criteria)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        std::cout << "wrote " << paths.csv_path << " and " << paths.json_path << "\n";
        return res.pass() ? 0 : 1;
    } catch (const frostlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_verify(const std::string& csv_path) {
    std::ifstream is(csv_path);
    if (!is) {
        std::cerr << "cannot open " << csv_path << "\n";
        return 2;
    }
    const auto res = frostlab::verify_csv(is);
    for (const auto& m : res.messages) std::cerr << m << "\n";
    if (res.exit_code == 0) std::cout << "verified: derived columns consistent\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frostlab: delta-discretized projections, incidences and sum-product "
                 "experiments\n\n" +
                 schema_help()};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "config file (key = value sections)")->required();

    std::string kind = "cantor", out_path = "set.txt";
    int level = 10, spacing_exponent = 3;
    long terms = 8;
    double s = 0.5;
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("gen", "generate a DeltaSet and write the text format");
    gen->add_option("--kind", kind, "cantor | ap | full")->capture_default_str();
    gen->add_option("--level", level, "dyadic level, delta = 2^-level")->capture_default_str();
    gen->add_option("--s", s, "target dimension for cantor")->capture_default_str();
    gen->add_option("--seed", seed, "construction seed")->capture_default_str();
    gen->add_option("--terms", terms, "ap: progression length")->capture_default_str();
    gen->add_option("--spacing-exponent", spacing_exponent, "ap: spacing = 2^-e")
        ->capture_default_str();
    gen->add_option("--out", out_path, "output path")->capture_default_str();

    std::string csv_path;
    auto* verify = app.add_subcommand("verify", "re-check pass flags of an emitted CSV");
    verify->add_option("csv", csv_path, "results.csv produced by `frostlab run`")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path);
    if (verify->parsed()) return cmd_verify(csv_path);

    // gen
    try {
        frostlab::DeltaSet set(1, 1, {});
        if (kind == "cantor") {
            const frostlab::DeltaSet fine =
                frostlab::cantor_set(level % 2 == 0 ? level : level + 1, s, seed);
            set = fine.level == level ? fine : frostlab::coarsen(fine, level);
        } else if (kind == "ap") {
            set = frostlab::ap_neighborhood_set(level, terms, spacing_exponent);
        } else if (kind == "full") {
            set = frostlab::quantize(
                std::vector<frostlab::Box>{
                    frostlab::Box{frostlab::Vec(0.0), frostlab::Vec(1.0)}},
                level, 1);
        } else {
            std::cerr << "unknown set kind: " << kind << "\n";
            return 2;
        }
        std::ofstream os(out_path, std::ios::binary);
        if (!os) {
            std::cerr << "cannot write " << out_path << "\n";
            return 2;
        }
        frostlab::write_delta_set(os, set);
        std::cout << "wrote " << set.cell_count() << " cells to " << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
