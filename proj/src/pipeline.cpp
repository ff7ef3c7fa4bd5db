#include "spike_spectra/pipeline.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "spike_spectra/artifacts.hpp"

namespace spikes {

namespace {

std::string fmt(double x) { return format_double(x); }

}  // namespace

std::string RunConfig::canonical_string() const {
    std::ostringstream s;
    s << "spike-spectra-config-v" << kSchemaVersion << ";dim=" << dim
      << ";exponent=" << fmt(exponent) << ";k=" << k << ";m=" << m << ";n=" << n
      << ";ell_target=" << fmt(ell_target) << ";quad_tol=" << fmt(quad_tol)
      << ";shoot_tol=" << fmt(shoot_tol) << ";gap_ratio=" << fmt(gap_ratio)
      << ";s_min=" << fmt(s_min) << ";s_max=" << fmt(s_max)
      << ";r_max=" << fmt(r_max);
    return s.str();
}

std::string RunConfig::hash() const { return hash_hex(canonical_string()); }

void RunConfig::validate() const {
    if (dim < 2) throw InvalidParams("dim must be >= 2");
    if (exponent <= 1.0) throw InvalidParams("exponent must exceed 1");
    if (dim >= 3 && exponent >= (dim + 2.0) / (dim - 2.0))
        throw InvalidParams("exponent must be subcritical for dim >= 3");
    if (k < 7) throw InvalidParams("k must be >= 7");
    if (m < 0 || n < 0) throw InvalidParams("m and n must be nonnegative");
    if ((m > 0) != (n > 0)) throw InvalidParams("set both m and n, or neither");
    if (m == 0 && ell_target <= 0.0)
        throw InvalidParams("either (m, n) or a positive ell_target is required");
    if (quad_tol <= 0.0 || quad_tol > 1e-3)
        throw InvalidParams("quad_tol must lie in (0, 1e-3]");
    if (shoot_tol <= 0.0 || shoot_tol > 1e-6)
        throw InvalidParams("shoot_tol must lie in (0, 1e-6]");
    if (gap_ratio <= 1.0) throw InvalidParams("gap_ratio must exceed 1");
    if (!(0.0 < s_min && s_min < s_max))
        throw InvalidParams("need 0 < s_min < s_max");
    if (s_max > r_max)
        throw InvalidParams("s_max must not exceed the profile radius r_max");
}

std::optional<Stage> stage_from_string(const std::string& name) {
    if (name == "groundstate") return Stage::groundstate;
    if (name == "kernels") return Stage::kernels;
    if (name == "configure") return Stage::configure;
    if (name == "assemble") return Stage::assemble;
    if (name == "spectrum") return Stage::spectrum;
    if (name == "report") return Stage::report;
    return std::nullopt;
}

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::groundstate: return "groundstate";
        case Stage::kernels: return "kernels";
        case Stage::configure: return "configure";
        case Stage::assemble: return "assemble";
        case Stage::spectrum: return "spectrum";
        case Stage::report: return "report";
    }
    return "?";
}

namespace {

using ordered_json = nlohmann::ordered_json;

bool file_exists(const std::string& path) {
    return std::filesystem::exists(path);
}

// Pull the recorded inputs fingerprint out of a JSON artifact or the leading
// CSV comment line; empty when absent or unreadable.
std::string recorded_inputs_hash(const std::string& path) {
    if (!file_exists(path)) return {};
    try {
        std::string text = read_file(path);
        if (!text.empty() && text[0] == '{') {
            auto j = ordered_json::parse(text);
            if (j.contains("inputs_hash")) return j["inputs_hash"].get<std::string>();
            return {};
        }
        std::size_t eol = text.find('\n');
        std::string head = text.substr(0, eol);
        std::string needle = "inputs_hash=";
        std::size_t pos = head.find(needle);
        if (pos == std::string::npos) return {};
        pos += needle.size();
        std::size_t end = head.find_first_of(",\n", pos);
        return head.substr(pos, end == std::string::npos ? std::string::npos
                                                         : end - pos);
    } catch (const std::exception&) {
        return {};
    }
}

// Insert/refresh an inputs_hash entry right after config_hash in an artifact
// produced by the serializers (which only stamp config_hash).
std::string with_inputs_hash(std::string text, const std::string& ihash) {
    if (!text.empty() && text[0] == '{') {
        auto j = ordered_json::parse(text);
        ordered_json out;
        for (auto it = j.begin(); it != j.end(); ++it) {
            out[it.key()] = it.value();
            if (it.key() == "config_hash") out["inputs_hash"] = ihash;
        }
        return out.dump(2) + "\n";
    }
    std::size_t pos = text.find("config_hash=");
    if (pos == std::string::npos) return text;
    pos = text.find_first_of(",\n", pos);
    if (pos == std::string::npos) return text;
    return text.substr(0, pos) + ", inputs_hash=" + ihash + text.substr(pos);
}

bool write_if_changed(const std::string& path, const std::string& contents) {
    if (file_exists(path)) {
        try {
            if (read_file(path) == contents) return false;
        } catch (const std::exception&) {
        }
    }
    write_file_atomic(path, contents);
    return true;
}

void say(Stage s, const std::string& what) {
    std::cerr << "[" << stage_name(s) << "] " << what << "\n";
}

struct StagePaths {
    std::string profile, kernels, config;
    std::string m1_csv, m1_manifest, h_csv, h_manifest;
    std::string dets_m1, dets_h, gaps, report;
};

StagePaths make_paths(const std::string& out_dir) {
    auto at = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    StagePaths p;
    p.profile = at("profile.json");
    p.kernels = at("kernels.csv");
    p.config = at("config.json");
    p.m1_csv = at("M1.csv");
    p.m1_manifest = at("M1_manifest.json");
    p.h_csv = at("Halpha.csv");
    p.h_manifest = at("Halpha_manifest.json");
    p.dets_m1 = at("dets_M1.csv");
    p.dets_h = at("dets_Halpha.csv");
    p.gaps = at("gaps.csv");
    p.report = at("spectral_report.json");
    return p;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, Stage first, Stage last) {
    cfg.validate();
    if (static_cast<int>(first) > static_cast<int>(last))
        throw InvalidParams("pipeline start stage lies after the end stage");
    std::filesystem::create_directories(cfg.out_dir);
    StagePaths paths = make_paths(cfg.out_dir);
    std::string chash = cfg.hash();

    PipelineResult result;
    result.config_hash = chash;

    auto must_be_cached = [&](Stage s, const std::string& path) {
        throw std::runtime_error("stage '" + stage_name(s) +
                                 "' has no valid cached artifact at " + path +
                                 "; rerun from an earlier stage");
    };

    // ---- ground state ------------------------------------------------
    RadialProfile profile;
    {
        std::ostringstream in;
        in << "groundstate|dim=" << cfg.dim << "|exponent=" << fmt(cfg.exponent)
           << "|shoot_tol=" << fmt(cfg.shoot_tol) << "|r_max=" << fmt(cfg.r_max);
        std::string ihash = hash_hex(in.str());
        if (recorded_inputs_hash(paths.profile) == ihash) {
            profile = profile_from_json(read_file(paths.profile));
            say(Stage::groundstate, "profile.json cached");
        } else if (Stage::groundstate < first) {
            must_be_cached(Stage::groundstate, paths.profile);
        } else {
            ProblemParams params{cfg.dim, cfg.exponent};
            SolverOptions opts;
            opts.r_max = cfg.r_max;
            opts.shoot_tol = cfg.shoot_tol;
            profile = solve_ground_state(params, opts);
            Diagnostics diag = validate_profile(profile);
            if (diag.max_residual > opts.residual_tol ||
                diag.monotone_violations != 0 || diag.positivity_violations != 0)
                throw NonConvergence(
                    "ground-state profile failed validation: residual " +
                    fmt(diag.max_residual));
            write_if_changed(paths.profile,
                             with_inputs_hash(profile_to_json(profile, chash), ihash));
            say(Stage::groundstate,
                "profile.json written (w0=" + fmt(profile.w0()) +
                    ", residual=" + fmt(diag.max_residual) + ")");
        }
        if (last == Stage::groundstate) return result;
    }

    // ---- kernel table -------------------------------------------------
    KernelTable table;
    QuadratureOptions quad;
    quad.quad_tol = cfg.quad_tol;
    quad.extent = cfg.r_max;
    {
        std::ostringstream in;
        in << "kernels|" << file_hash(paths.profile) << "|quad_tol="
           << fmt(cfg.quad_tol) << "|s_min=" << fmt(cfg.s_min)
           << "|s_max=" << fmt(cfg.s_max);
        std::string ihash = hash_hex(in.str());
        if (recorded_inputs_hash(paths.kernels) == ihash) {
            table = kernel_table_from_csv(read_file(paths.kernels));
            say(Stage::kernels, "kernels.csv cached");
        } else if (Stage::kernels < first) {
            must_be_cached(Stage::kernels, paths.kernels);
        } else {
            table = build_kernel_table(profile, cfg.s_min, cfg.s_max, 129, quad);
            std::string csv = kernel_table_to_csv(table, chash,
                                                  file_hash(paths.profile));
            write_if_changed(paths.kernels, with_inputs_hash(csv, ihash));
            say(Stage::kernels, "kernels.csv written (129 nodes)");
        }
        if (last == Stage::kernels) return result;
    }

    // ---- configuration --------------------------------------------------
    SpikeConfiguration config;
    {
        std::ostringstream in;
        in << "configure|" << file_hash(paths.kernels) << "|k=" << cfg.k
           << "|m=" << cfg.m << "|n=" << cfg.n
           << "|ell_target=" << fmt(cfg.ell_target);
        std::string ihash = hash_hex(in.str());
        if (recorded_inputs_hash(paths.config) == ihash) {
            config = configuration_from_json(read_file(paths.config));
            say(Stage::configure, "config.json cached");
        } else if (Stage::configure < first) {
            must_be_cached(Stage::configure, paths.config);
        } else {
            int m = cfg.m, n = cfg.n;
            if (m == 0) {
                // candidates come sorted by distance to the target; dense
                // integer pairs can sit arbitrarily close, so take the
                // smallest configuration among them to keep the matrices
                // at desk scale
                auto cands = suggest_mn(cfg.k, cfg.ell_target, 100000);
                const MnCandidate* pick = &cands.front();
                for (const auto& c : cands)
                    if (c.m + 2 * c.n < pick->m + 2 * pick->n) pick = &c;
                m = pick->m;
                n = pick->n;
                say(Stage::configure,
                    "selected m=" + std::to_string(m) + ", n=" + std::to_string(n) +
                        " for target spacing " + fmt(cfg.ell_target));
            }
            BalanceResult bal = solve_balancing(table, cfg.k, m, n);
            config = build_configuration(cfg.k, m, n, bal.ell, bal.ell_bar);
            write_if_changed(paths.config,
                             with_inputs_hash(configuration_to_json(config, chash),
                                              ihash));
            say(Stage::configure, "config.json written (ell=" + fmt(config.ell) +
                                      ", ell_bar=" + fmt(config.ell_bar) + ")");
        }
        if (last == Stage::configure) return result;
    }

    // ---- assembly (recomputed in memory; artifacts refreshed on change) --
    SigmaConstants sigmas =
        sigma_constants(table, config.ell, config.ell_bar, config.k);
    BlockMatrix M1 = assemble_M1(config, sigmas);
    {
        std::ostringstream in;
        in << "assemble|" << file_hash(paths.config) << "|" << file_hash(paths.kernels)
           << "|dim=" << cfg.dim;
        std::string ihash = hash_hex(in.str());
        bool wrote = write_if_changed(
            paths.m1_csv, with_inputs_hash(matrix_to_csv(M1, chash), ihash));
        write_if_changed(paths.m1_manifest,
                         with_inputs_hash(matrix_manifest_json(M1, chash), ihash));
        if (cfg.dim >= 3) {
            BlockMatrix H = assemble_H_alpha(config, sigmas);
            write_if_changed(paths.h_csv,
                             with_inputs_hash(matrix_to_csv(H, chash), ihash));
            write_if_changed(paths.h_manifest,
                             with_inputs_hash(matrix_manifest_json(H, chash), ihash));
        }
        say(Stage::assemble, wrote ? "matrices written" : "matrices unchanged");
        if (last == Stage::assemble) return result;
    }

    // ---- spectrum ------------------------------------------------------
    NondegeneracyReport report =
        nondegeneracy_report(config, table, cfg.dim, cfg.gap_ratio);
    {
        std::ostringstream in;
        in << "spectrum|" << file_hash(paths.config) << "|" << file_hash(paths.kernels)
           << "|dim=" << cfg.dim << "|gap_ratio=" << fmt(cfg.gap_ratio);
        std::string ihash = hash_hex(in.str());
        write_if_changed(paths.dets_m1,
                         with_inputs_hash(det_table_to_csv(report.m1.dets, "M1", chash),
                                          ihash));
        std::vector<std::tuple<std::string, double, int, double>> gap_rows;
        gap_rows.emplace_back("M1", config.ell, report.m1.kernel_dim, report.m1.gap);
        if (!report.h_alpha.empty()) {
            write_if_changed(
                paths.dets_h,
                with_inputs_hash(
                    det_table_to_csv(report.h_alpha.front().dets, "Halpha", chash),
                    ihash));
            gap_rows.emplace_back("Halpha", config.ell,
                                  report.h_alpha.front().kernel_dim,
                                  report.h_alpha.front().gap);
        }
        write_if_changed(paths.gaps,
                         with_inputs_hash(gap_rows_to_csv(gap_rows, chash), ihash));
        say(Stage::spectrum,
            "kernel dims: M1=" + std::to_string(report.m1.kernel_dim) +
                (report.h_alpha.empty()
                     ? std::string()
                     : ", Halpha=" +
                           std::to_string(report.h_alpha.front().kernel_dim)));
        result.report = report;
        result.pass = report.pass;
        if (last == Stage::spectrum) return result;
    }

    // ---- report ----------------------------------------------------------
    {
        std::ostringstream in;
        in << "report|" << file_hash(paths.config) << "|dim=" << cfg.dim
           << "|gap_ratio=" << fmt(cfg.gap_ratio);
        std::string ihash = hash_hex(in.str());
        write_if_changed(paths.report,
                         with_inputs_hash(spectral_report_to_json(report, chash),
                                          ihash));
        say(Stage::report,
            std::string("spectral_report.json written: ") +
                (report.pass ? "PASS" : "FAIL") + " (kernel " +
                std::to_string(report.total_kernel_dim) + "/" +
                std::to_string(report.expected_kernel_dim) + ", min gap ratio " +
                fmt(report.min_gap_residual_ratio) + ")");
    }
    return result;
}

}  // namespace spikes
