#include <algorithm>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "spike_spectra/artifacts.hpp"
#include "spike_spectra/pipeline.hpp"

namespace {

using spikes::RunConfig;
using spikes::Stage;

void add_common_options(CLI::App* app, RunConfig& cfg) {
    app->add_option("--dim", cfg.dim, "ambient dimension (>= 2)");
    app->add_option("--exponent", cfg.exponent, "nonlinearity exponent p");
    app->add_option("--k", cfg.k, "polygon order (>= 7)");
    app->add_option("--m", cfg.m, "spikes per ray segment");
    app->add_option("--n", cfg.n, "outer half-count (2n-1 spikes per edge)");
    app->add_option("--ell-target", cfg.ell_target,
                    "desired ray spacing; picks (m, n) when they are 0");
    app->add_option("--quad-tol", cfg.quad_tol, "kernel quadrature tolerance");
    app->add_option("--shoot-tol", cfg.shoot_tol, "profile shooting tolerance");
    app->add_option("--gap-ratio", cfg.gap_ratio,
                    "required singular-value ratio across the kernel gap");
    app->add_option("--s-min", cfg.s_min, "kernel table lower end");
    app->add_option("--s-max", cfg.s_max, "kernel table upper end");
    app->add_option("--r-max", cfg.r_max, "profile truncation radius");
    app->add_option("--out", cfg.out_dir, "artifact directory");
}

void print_report(const spikes::NondegeneracyReport& rep) {
    auto line = [](const spikes::SpectralReport& r) {
        std::printf("  %-8s kernel %d  gap %.6e  max residual %.3e  gap ratio %.3e\n",
                    r.matrix_id.c_str(), r.kernel_dim, r.gap,
                    r.kernel_residuals.empty()
                        ? 0.0
                        : *std::max_element(r.kernel_residuals.begin(),
                                            r.kernel_residuals.end()),
                    r.gap_ratio);
    };
    std::printf("configuration: k=%d m=%d n=%d  ell=%.9g ell_bar=%.9g  dim=%d\n",
                rep.k, rep.m, rep.n, rep.ell, rep.ell_bar, rep.dim);
    line(rep.m1);
    for (const auto& h : rep.h_alpha) line(h);
    std::printf("kernel total %d (expected %d), min gap/residual ratio %.3e\n",
                rep.total_kernel_dim, rep.expected_kernel_dim,
                rep.min_gap_residual_ratio);
    std::printf("%s\n", rep.pass ? "PASS" : "FAIL");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spike-spectra: spectral skeleton of polygonal multi-spike "
                 "configurations"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string first_name = "groundstate";

    struct Sub {
        const char* name;
        const char* help;
        Stage last;
    };
    const Sub subs[] = {
        {"groundstate", "solve and store the radial ground state", Stage::groundstate},
        {"kernels", "tabulate the interaction kernels", Stage::kernels},
        {"configure", "solve the balance equations and place spikes", Stage::configure},
        {"assemble", "assemble the interaction matrices", Stage::assemble},
        {"spectrum", "certify kernels and determinant tables", Stage::spectrum},
        {"report", "write the full spectral report", Stage::report},
        {"run", "run the whole pipeline", Stage::report},
    };

    CLI::App* chosen = nullptr;
    Stage last = Stage::report;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        add_common_options(sub, cfg);
        if (std::string(s.name) == "run")
            sub->add_option("--stage", first_name,
                            "first stage to recompute (earlier ones must be cached)");
        sub->callback([&chosen, &last, sub, stage = s.last]() {
            chosen = sub;
            last = stage;
        });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Stage first = Stage::groundstate;
        if (auto parsed = spikes::stage_from_string(first_name)) {
            first = *parsed;
        } else {
            std::cerr << "unknown stage '" << first_name << "'\n";
            return 2;
        }
        spikes::PipelineResult result = spikes::run_pipeline(cfg, first, last);
        std::cout << "config " << result.config_hash << "\n";
        if (last < Stage::spectrum) return 0;
        if (chosen && std::string(chosen->get_name()) != "spectrum")
            print_report(result.report);
        return result.pass ? 0 : 1;
    } catch (const spikes::InvalidParams& err) {
        std::cerr << "invalid parameters: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
}
