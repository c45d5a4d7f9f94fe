// srd: scenario-based robust design from the command line.
//
//   srd template [-o FILE]
//   srd design CONFIG
//   srd analyze CONFIG DESIGN
//   srd sequential CONFIG
//   srd demo-enclosure [CONFIG]
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 solver failure,
// 3 file system error. SRD_THREADS overrides the worker count.

#include "srd/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

enum Exit { kOk = 0, kValidation = 1, kSolver = 2, kIo = 3 };

srd::RunConfig config_or_default(const std::string& path) {
    return path.empty() ? srd::default_config() : srd::load_config(path);
}

int run(int argc, char** argv) {
    CLI::App app{"Scenario-based robust design under uncertainty"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("srd ") + srd::kVersion);
    std::string config_path, design_path, template_out, output_override;

    auto* tpl = app.add_subcommand("template", "print the default configuration");
    tpl->add_option("-o,--output", template_out, "write to this file instead of stdout");

    auto* design = app.add_subcommand("design", "solve one formulation and classify outliers");
    design->add_option("config", config_path, "run configuration (JSON)")->required();

    auto* analyze = app.add_subcommand("analyze", "reliability and robustness of a stored design");
    analyze->add_option("config", config_path, "run configuration (JSON)")->required();
    analyze->add_option("design", design_path, "design file written by 'design'")->required();

    auto* sequential = app.add_subcommand("sequential", "grow the training set from a test pool");
    sequential->add_option("config", config_path, "run configuration (JSON)")->required();

    auto* demo = app.add_subcommand("demo-enclosure", "data-enclosure sweeps with seeded datasets");
    demo->add_option("config", config_path, "run configuration (JSON); defaults when omitted");

    for (auto* sub : {design, analyze, sequential, demo})
        sub->add_option("--out", output_override, "output directory (overrides the configuration)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    if (tpl->parsed()) {
        const std::string text = srd::template_json();
        if (template_out.empty()) std::cout << text;
        else srd::write_atomic(template_out, text);
        return kOk;
    }

    srd::RunConfig cfg = config_or_default(config_path);
    if (!output_override.empty()) cfg.output = output_override;

    if (design->parsed()) {
        const auto rep = srd::cmd_design(cfg);
        std::cout << "J=" << srd::format_real(rep.objective) << " sigma=" << rep.sigma()
                  << " status=" << srd::to_string(rep.status) << " config=" << rep.config_hash << '\n';
        return rep.converged() ? kOk : kSolver;
    }
    if (analyze->parsed()) {
        const auto rep = srd::cmd_analyze(cfg, design_path);
        std::cout << "p_nom=" << srd::format_real(rep.p_nom.p) << " [" << srd::format_real(rep.p_nom.lo) << ", "
                  << srd::format_real(rep.p_nom.hi) << "]\n";
        for (const auto& [g, e] : rep.p_per)
            std::cout << "p_per(" << g << ")=" << srd::format_real(e.p) << " [" << srd::format_real(e.lo) << ", "
                      << srd::format_real(e.hi) << "]\n";
        return kOk;
    }
    if (sequential->parsed()) {
        const auto res = srd::cmd_sequential(cfg);
        for (const auto& it : res.iterations)
            std::cout << "iteration " << it.iteration << " n_u=" << it.n_u << " J=" << srd::format_real(it.objective)
                      << " p_hat=" << srd::format_real(it.p_hat.p) << '\n';
        std::cout << "status=" << srd::to_string(res.status) << '\n';
        return kOk;
    }
    if (demo->parsed()) {
        const auto b = srd::cmd_demo_enclosure(cfg);
        for (const auto& d : b.small.designs)
            std::cout << d.cell.label << ' ' << srd::to_string(d.cell.kind) << " m=" << d.cell.m
                      << " sigma=" << d.sigma() << " J=" << srd::format_real(d.objective()) << '\n';
        if (b.large)
            for (const auto& ld : b.large->designs)
                std::cout << ld.design.cell.label << " J=" << srd::format_real(ld.design.objective())
                          << (ld.analysis ? " p_nom=" + srd::format_real(ld.analysis->p_nom.p) : std::string()) << '\n';
        std::cout << "reports written to " << cfg.output << '\n';
        return kOk;
    }
    return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const srd::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const srd::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const srd::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const srd::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const srd::InvalidStart& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const srd::NonFiniteValue& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }
}
