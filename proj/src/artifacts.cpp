#include "spike_spectra/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spikes {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_hash(const std::string& path) { return hash_hex(read_file(path)); }

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, p);
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

namespace {

double parse_double(const std::string& tok) {
    if (tok == "nan") return std::nan("");
    if (tok == "inf") return HUGE_VAL;
    if (tok == "-inf") return -HUGE_VAL;
    return std::strtod(tok.c_str(), nullptr);
}

ordered_json jnum(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Comment-line metadata: "# key=value, key=value, ...".
std::string meta_value(const std::string& comment, const std::string& key) {
    std::string needle = key + "=";
    std::size_t pos = comment.find(needle);
    if (pos == std::string::npos)
        throw std::runtime_error("metadata key '" + key + "' missing");
    pos += needle.size();
    std::size_t end = comment.find_first_of(",\n", pos);
    if (end == std::string::npos) end = comment.size();
    return comment.substr(pos, end - pos);
}

}  // namespace

std::string profile_to_json(const RadialProfile& profile,
                            const std::string& config_hash) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "profile";
    j["config_hash"] = config_hash;
    j["dim"] = profile.params.dim;
    j["exponent"] = profile.params.exponent;
    ordered_json opts;
    opts["r_max"] = profile.opts.r_max;
    opts["grid_step"] = profile.opts.grid_step;
    opts["rk_step"] = profile.opts.rk_step;
    opts["fill_step"] = profile.opts.fill_step;
    opts["shoot_tol"] = profile.opts.shoot_tol;
    opts["match_radius"] = profile.opts.match_radius;
    opts["residual_tol"] = profile.opts.residual_tol;
    j["solver"] = opts;
    j["step"] = profile.step;
    j["tail_amp"] = profile.tail_amp;
    j["values"] = profile.values;
    j["derivs"] = profile.derivs;
    return j.dump(2) + "\n";
}

RadialProfile profile_from_json(const std::string& json_text) {
    ordered_json j = ordered_json::parse(json_text);
    RadialProfile prof;
    prof.params.dim = j.at("dim").get<int>();
    prof.params.exponent = j.at("exponent").get<double>();
    const auto& opts = j.at("solver");
    prof.opts.r_max = opts.at("r_max").get<double>();
    prof.opts.grid_step = opts.at("grid_step").get<double>();
    prof.opts.rk_step = opts.at("rk_step").get<double>();
    prof.opts.fill_step = opts.at("fill_step").get<double>();
    prof.opts.shoot_tol = opts.at("shoot_tol").get<double>();
    prof.opts.match_radius = opts.at("match_radius").get<double>();
    prof.opts.residual_tol = opts.at("residual_tol").get<double>();
    prof.step = j.at("step").get<double>();
    prof.tail_amp = j.at("tail_amp").get<double>();
    prof.values = j.at("values").get<std::vector<double>>();
    prof.derivs = j.at("derivs").get<std::vector<double>>();
    if (prof.values.size() != prof.derivs.size() || prof.values.size() < 2)
        throw std::runtime_error("profile arrays malformed");
    return prof;
}

std::string kernel_table_to_csv(const KernelTable& table,
                                const std::string& config_hash,
                                const std::string& profile_hash) {
    std::ostringstream out;
    out << "# schema_version=" << kSchemaVersion << ", config_hash=" << config_hash
        << ", profile_hash=" << profile_hash
        << ", quad_tol=" << format_double(table.quad_tol())
        << ", dim=" << table.dim()
        << ", exponent=" << format_double(table.exponent()) << "\n";
    out << "s,psi,psi1,psi2\n";
    const auto& s = table.grid();
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_double(s[i]) << ',' << format_double(table.column(0)[i])
            << ',' << format_double(table.column(1)[i]) << ','
            << format_double(table.column(2)[i]) << "\n";
    return out.str();
}

KernelTable kernel_table_from_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string comment, header, line;
    if (!std::getline(in, comment) || comment.rfind("# ", 0) != 0)
        throw std::runtime_error("kernel CSV missing metadata comment");
    if (!std::getline(in, header) || header != "s,psi,psi1,psi2")
        throw std::runtime_error("kernel CSV missing column header");
    double quad_tol = parse_double(meta_value(comment, "quad_tol"));
    int dim = static_cast<int>(std::strtol(meta_value(comment, "dim").c_str(),
                                           nullptr, 10));
    double exponent = parse_double(meta_value(comment, "exponent"));
    std::vector<double> s, p0, p1, p2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tok = split(line, ',');
        if (tok.size() != 4) throw std::runtime_error("kernel CSV row malformed");
        s.push_back(parse_double(tok[0]));
        p0.push_back(parse_double(tok[1]));
        p1.push_back(parse_double(tok[2]));
        p2.push_back(parse_double(tok[3]));
    }
    return KernelTable(std::move(s), std::move(p0), std::move(p1), std::move(p2),
                       quad_tol, dim, exponent);
}

std::string configuration_to_json(const SpikeConfiguration& config,
                                  const std::string& config_hash) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "configuration";
    j["config_hash"] = config_hash;
    j["k"] = config.k;
    j["m"] = config.m;
    j["n"] = config.n;
    j["ell"] = config.ell;
    j["ell_bar"] = config.ell_bar;
    j["constraint_residual"] = config.constraint_residual;
    j["closure_residual"] = config.closure_residual;
    ordered_json pts = ordered_json::array();
    for (const SpikePoint& p : config.points) {
        ordered_json q;
        q["i"] = p.i;
        q["j"] = p.j;
        q["sign"] = p.sign;
        q["x"] = p.center[0];
        q["y"] = p.center[1];
        pts.push_back(q);
    }
    j["points"] = pts;
    return j.dump(2) + "\n";
}

SpikeConfiguration configuration_from_json(const std::string& json_text) {
    ordered_json j = ordered_json::parse(json_text);
    SpikeConfiguration cfg;
    cfg.k = j.at("k").get<int>();
    cfg.m = j.at("m").get<int>();
    cfg.n = j.at("n").get<int>();
    cfg.ell = j.at("ell").get<double>();
    cfg.ell_bar = j.at("ell_bar").get<double>();
    cfg.constraint_residual = j.at("constraint_residual").get<double>();
    cfg.closure_residual = j.at("closure_residual").get<double>();
    cfg.points.resize(cfg.k * (cfg.m + 2 * cfg.n));
    const auto& pts = j.at("points");
    if (static_cast<int>(pts.size()) != cfg.spike_count())
        throw std::runtime_error("configuration point count mismatch");
    for (const auto& q : pts) {
        SpikePoint p;
        p.i = q.at("i").get<int>();
        p.j = q.at("j").get<int>();
        p.sign = q.at("sign").get<int>();
        p.center = {q.at("x").get<double>(), q.at("y").get<double>()};
        cfg.points[cfg.index(p.i, p.j)] = p;
    }
    constexpr double kPi = 3.14159265358979323846;
    cfg.frames.resize(cfg.k);
    for (int i = 0; i < cfg.k; ++i) {
        double th = 2.0 * kPi * i / cfg.k;
        double phi = th + kPi / cfg.k;
        cfg.frames[i].R = {std::cos(th), std::sin(th)};
        cfg.frames[i].Rperp = {std::sin(th), -std::cos(th)};
        cfg.frames[i].t = {-std::sin(phi), std::cos(phi)};
        cfg.frames[i].n = {std::cos(phi), std::sin(phi)};
    }
    return cfg;
}

std::string matrix_to_csv(const BlockMatrix& matrix, const std::string& config_hash) {
    std::ostringstream out;
    out << "# schema_version=" << kSchemaVersion << ", config_hash=" << config_hash
        << ", id=" << matrix.id << ", k=" << matrix.k << ", m=" << matrix.m
        << ", n=" << matrix.n << ", components=" << matrix.components
        << ", scale=" << format_double(matrix.scale) << "\n";
    for (Eigen::Index r = 0; r < matrix.dense.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.dense.cols(); ++c) {
            if (c) out << ',';
            out << format_double(matrix.dense(r, c));
        }
        out << "\n";
    }
    return out.str();
}

namespace {

ordered_json sigmas_to_json(const SigmaConstants& s) {
    ordered_json j;
    j["delta2"] = jnum(s.delta2);
    j["sigma1"] = jnum(s.sigma1);
    j["sigma2"] = jnum(s.sigma2);
    j["sigma3"] = jnum(s.sigma3);
    j["ell"] = jnum(s.ell);
    j["ell_bar"] = jnum(s.ell_bar);
    j["k"] = s.k;
    j["psi1_ell"] = jnum(s.psi1_ell);
    j["psi2_ell"] = jnum(s.psi2_ell);
    j["psi1_bar"] = jnum(s.psi1_bar);
    j["psi2_bar"] = jnum(s.psi2_bar);
    j["fd_sigma3"] = jnum(s.fd_sigma3);
    j["fd_sigma3_rel_diff"] = jnum(s.fd_sigma3_rel_diff);
    return j;
}

ordered_json spectral_to_json(const SpectralReport& r) {
    ordered_json j;
    j["matrix_id"] = r.matrix_id;
    j["kernel_dim"] = r.kernel_dim;
    j["gap"] = jnum(r.gap);
    j["threshold"] = jnum(r.threshold);
    j["gap_ratio"] = jnum(r.gap_ratio);
    ordered_json res = ordered_json::array();
    for (double v : r.kernel_residuals) res.push_back(jnum(v));
    j["kernel_residuals"] = res;
    ordered_json ang = ordered_json::array();
    for (double v : r.principal_angles) ang.push_back(jnum(v));
    j["principal_angles"] = ang;
    ordered_json sml = ordered_json::array();
    for (double v : r.smallest_singular) sml.push_back(jnum(v));
    j["smallest_singular"] = sml;
    ordered_json dets = ordered_json::array();
    for (const DetComparison& d : r.dets) {
        ordered_json row;
        row["freq"] = d.freq;
        row["det_numeric"] = jnum(d.det_numeric);
        row["det_closed_form"] = jnum(d.det_closed_form);
        row["rel_err"] = jnum(d.rel_err);
        dets.push_back(row);
    }
    j["dets"] = dets;
    return j;
}

}  // namespace

std::string matrix_manifest_json(const BlockMatrix& matrix,
                                 const std::string& config_hash) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "matrix_manifest";
    j["config_hash"] = config_hash;
    j["id"] = matrix.id;
    j["k"] = matrix.k;
    j["m"] = matrix.m;
    j["n"] = matrix.n;
    j["components"] = matrix.components;
    j["rows"] = static_cast<long long>(matrix.dense.rows());
    j["scale"] = jnum(matrix.scale);
    j["sigmas"] = sigmas_to_json(matrix.sigmas);
    return j.dump(2) + "\n";
}

std::string det_table_to_csv(const std::vector<DetComparison>& rows,
                             const std::string& matrix_id,
                             const std::string& config_hash) {
    std::ostringstream out;
    out << "# schema_version=" << kSchemaVersion << ", config_hash=" << config_hash
        << ", matrix_id=" << matrix_id << "\n";
    out << "freq,det_numeric,det_closed_form,rel_err\n";
    for (const DetComparison& d : rows)
        out << d.freq << ',' << format_double(d.det_numeric) << ','
            << format_double(d.det_closed_form) << ',' << format_double(d.rel_err)
            << "\n";
    return out.str();
}

std::string gap_rows_to_csv(
    const std::vector<std::tuple<std::string, double, int, double>>& rows,
    const std::string& config_hash) {
    std::ostringstream out;
    out << "# schema_version=" << kSchemaVersion << ", config_hash=" << config_hash
        << "\n";
    out << "matrix_id,ell,kernel_dim,gap\n";
    for (const auto& [id, ell, kdim, gap] : rows)
        out << id << ',' << format_double(ell) << ',' << kdim << ','
            << format_double(gap) << "\n";
    return out.str();
}

std::string spectral_report_to_json(const NondegeneracyReport& report,
                                    const std::string& config_hash) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "spectral_report";
    j["config_hash"] = config_hash;
    j["pass"] = report.pass;
    j["dim"] = report.dim;
    j["k"] = report.k;
    j["m"] = report.m;
    j["n"] = report.n;
    j["ell"] = jnum(report.ell);
    j["ell_bar"] = jnum(report.ell_bar);
    j["expected_kernel_dim"] = report.expected_kernel_dim;
    j["total_kernel_dim"] = report.total_kernel_dim;
    j["min_gap_residual_ratio"] = jnum(report.min_gap_residual_ratio);
    j["m1"] = spectral_to_json(report.m1);
    ordered_json hs = ordered_json::array();
    for (const auto& h : report.h_alpha) hs.push_back(spectral_to_json(h));
    j["h_alpha"] = hs;
    return j.dump(2) + "\n";
}

}  // namespace spikes
