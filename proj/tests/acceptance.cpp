// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
// with the measured numbers; the process exits nonzero if any line fails.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spike_spectra/configuration.hpp"
#include "spike_spectra/ground_state.hpp"
#include "spike_spectra/kernels.hpp"
#include "spike_spectra/matrices.hpp"
#include "spike_spectra/pipeline.hpp"
#include "spike_spectra/spectral.hpp"
#include "spike_spectra/structured.hpp"

using namespace spikes;
namespace fs = std::filesystem;

namespace {

const double kPi = 3.14159265358979323846;

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

std::array<double, 2> unit(std::mt19937& rng) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    double t = ang(rng);
    return {std::cos(t), std::sin(t)};
}

double dot(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[0] + a[1] * b[1];
}

std::array<double, 2> perp(const std::array<double, 2>& e) {
    return {-e[1], e[0]};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good()) return "<missing " + p.string() + ">";
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// shared fixtures, built once
const RadialProfile& prof2() {
    static RadialProfile p = solve_ground_state({2, 3.0});
    return p;
}
const RadialProfile& prof3() {
    static RadialProfile p = solve_ground_state({3, 3.0});
    return p;
}
const KernelTable& tab2() {
    static KernelTable t = build_kernel_table(prof2(), 6.0, 24.0, 65);
    return t;
}
const KernelTable& tab3() {
    static KernelTable t = build_kernel_table(prof3(), 6.0, 24.0, 65);
    return t;
}

SpikeConfiguration balanced_config(const KernelTable& table, int k, int m, int n) {
    BalanceResult b = solve_balancing(table, k, m, n);
    return build_configuration(k, m, n, b.ell, b.ell_bar);
}

// ---- criterion 1 -----------------------------------------------------------

Outcome criterion_ground_state() {
    double worst = 0.0;
    for (double p : {2.0, 3.0}) {
        RadialProfile prof = solve_ground_state({1, p});
        for (std::size_t i = 0; i < prof.size(); ++i) {
            double r = static_cast<double>(i) * prof.step;
            worst = std::max(worst, std::abs(prof.values[i] - soliton_1d(p, r)));
        }
        for (double r : {0.37, 2.41, 7.03, 19.9})
            worst = std::max(worst, std::abs(eval_w(prof, r) - soliton_1d(p, r)));
    }
    return {worst <= 1e-8, "max soliton error " + num(worst) + " (tol 1e-8)"};
}

// ---- criterion 2 -----------------------------------------------------------

Outcome criterion_structured() {
    double worst_inv = 0.0;
    for (int nbar : {50, 200}) {
        Eigen::MatrixXd T = ToeplitzT{nbar}.dense();
        Eigen::MatrixXd Ti(nbar, nbar);
        for (int i = 1; i <= nbar; ++i)
            for (int j = 1; j <= nbar; ++j)
                Ti(i - 1, j - 1) = toeplitz_inverse_entry(nbar, i, j);
        worst_inv = std::max(
            worst_inv,
            (T * Ti - Eigen::MatrixXd::Identity(nbar, nbar)).cwiseAbs().maxCoeff());
    }

    double worst_bnd = 0.0;
    for (int nbar : {50, 200}) {
        Eigen::MatrixXd T = ToeplitzT{nbar}.dense();
        BoundaryVectors bv = boundary_vectors(nbar);
        Eigen::Map<Eigen::VectorXd> up(bv.up.data(), nbar);
        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(nbar);
        e1(0) = 1.0;
        worst_bnd = std::max(worst_bnd, (T * up - e1).cwiseAbs().maxCoeff());
    }

    std::mt19937 rng(20260814);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double worst_spec = 0.0;
    for (int k : {16, 64}) {
        Circulant c;
        c.first_row.resize(k);
        for (double& x : c.first_row) x = coef(rng);
        auto eta = circulant_eigenvalues(c);
        Eigen::EigenSolver<Eigen::MatrixXd> es(c.dense());
        std::vector<std::complex<double>> dense_eigs(k);
        for (int s = 0; s < k; ++s) dense_eigs[s] = es.eigenvalues()(s);
        // nearest-match distance both ways; sorting would mispair close
        // real parts between the two solvers
        auto hausdorff = [](const std::vector<std::complex<double>>& xs,
                            const std::vector<std::complex<double>>& ys) {
            double worst = 0.0;
            for (const auto& x : xs) {
                double best = 1e300;
                for (const auto& y : ys) best = std::min(best, std::abs(x - y));
                worst = std::max(worst, best);
            }
            return worst;
        };
        worst_spec = std::max(worst_spec, hausdorff(eta, dense_eigs));
        worst_spec = std::max(worst_spec, hausdorff(dense_eigs, eta));
    }

    Eigen::MatrixXcd U = DFTMatrix{64}.dense();
    double unit_err =
        (U.adjoint() * U - Eigen::MatrixXcd::Identity(64, 64)).cwiseAbs().maxCoeff();

    bool ok = worst_inv <= 1e-11 && worst_bnd <= 1e-13 && worst_spec <= 1e-10 &&
              unit_err <= 1e-12;
    return {ok, "T*Tinv " + num(worst_inv) + " (1e-11), T*Sup " + num(worst_bnd) +
                    " (1e-13), spectra " + num(worst_spec) + " (1e-10), DFT " +
                    num(unit_err) + " (1e-12)"};
}

// ---- criterion 3 -----------------------------------------------------------

Outcome criterion_projection() {
    QuadratureOptions quad;
    double tol = 10.0 * quad.quad_tol;
    std::mt19937 rng(42);

    double worst_decomp = 0.0;
    for (double ell : {8.0, 12.0, 16.0}) {
        double p1 = psi1(prof2(), ell);
        double p2 = psi2(prof2(), ell);
        for (int trial = 0; trial < 20; ++trial) {
            auto a = unit(rng), b = unit(rng), e = unit(rng);
            double raw = interaction_projection(prof2(), a, b, ell, e);
            double decomp =
                -dot(a, e) * dot(b, e) * p1 + dot(a, perp(e)) * dot(b, perp(e)) * p2;
            worst_decomp = std::max(worst_decomp, std::abs(raw - decomp));
        }
    }

    double worst_spread = 0.0;
    for (double s : {9.0, 14.0}) {
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < 8; ++j) {
            double th = kPi * j / 8.0;
            double v = psi(prof2(), s, {std::cos(th), std::sin(th)});
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst_spread = std::max(worst_spread, hi - lo);
    }

    bool ok = worst_decomp <= tol && worst_spread <= tol;
    return {ok, "decomposition " + num(worst_decomp) + ", rotation spread " +
                    num(worst_spread) + " (tol " + num(tol) + ")"};
}

// ---- criterion 4 -----------------------------------------------------------

Outcome criterion_far_field() {
    auto remainder = [&](double s) {
        double h = 1e-3;
        double up = kernels_at(prof2(), s + h).psi;
        double dn = kernels_at(prof2(), s - h).psi;
        return -(std::log(up) - std::log(dn)) / (2.0 * h) - 1.0 - 0.5 / s;
    };
    double ratio = remainder(8.0) / remainder(16.0);

    double lo = 1e300, hi = -1e300, sum = 0.0;
    int cnt = 0;
    for (double ell = 8.0; ell <= 20.0; ell += 2.0) {
        double d = std::log(kernels_at(prof2(), ell).psi1) + ell + 0.5 * std::log(ell);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
        ++cnt;
    }
    double drift = (hi - lo) / std::abs(sum / cnt);

    bool ok = ratio >= 3.0 && ratio <= 5.0 && drift <= 0.05;
    return {ok, "remainder ratio under doubling " + num(ratio) +
                    " (need [3,5]), amplitude drift " + num(drift) + " (need <= 5%)"};
}

// ---- criterion 5 -----------------------------------------------------------

Outcome criterion_balance() {
    int k = 8, m = 14, n = 6;
    double two_s = 2.0 * std::sin(kPi / k);
    BalanceResult b1 = solve_balancing(tab2(), k, m, n);
    double rel1 = std::abs(tab2().psi_of(b1.ell) - two_s * tab2().psi_of(b1.ell_bar)) /
                  tab2().psi_of(b1.ell);
    double rel2 = std::abs(two_s * m * b1.ell - (2.0 * n - 1.0) * b1.ell_bar) /
                  ((2.0 * n - 1.0) * b1.ell_bar);

    // the same root at doubled spacing: smallest pair predicting 2*ell
    auto cands = suggest_mn(k, 2.0 * b1.ell, 100000);
    const MnCandidate* pick = &cands.front();
    for (const auto& c : cands)
        if (c.m + 2 * c.n < pick->m + 2 * pick->n) pick = &c;
    BalanceResult b2 = solve_balancing(tab2(), k, pick->m, pick->n);

    double c1 = b1.ell_bar - b1.ell - std::log(two_s);
    double c2 = b2.ell_bar - b2.ell - std::log(two_s);
    double measured = c1 / c2;
    double expected = b2.ell / b1.ell;

    bool ok = rel1 <= 1e-9 && rel2 <= 1e-9 && b1.residual_balance <= 1e-9 &&
              b1.residual_constraint <= 1e-9 &&
              std::abs(measured - expected) <= 0.3 * expected;
    return {ok, "residuals " + num(rel1) + "/" + num(rel2) +
                    " (1e-9); offset ratio ell " + num(b1.ell) + " -> " +
                    num(b2.ell) + ": " + num(measured) + " vs " + num(expected) +
                    " (+-30%)"};
}

// ---- criterion 6 -----------------------------------------------------------

Outcome criterion_entry_oracle() {
    SpikeConfiguration cfg = balanced_config(tab3(), 8, 14, 6);
    SigmaConstants sg = sigma_constants(tab3(), cfg.ell, cfg.ell_bar, 8);
    BlockMatrix M = assemble_M1(cfg, sg);
    BlockMatrix H = assemble_H_alpha(cfg, sg);
    int P = cfg.spike_count(), m = cfg.m, nn = cfg.n;
    double tol_rel = 5.0 * std::exp(-0.3 * cfg.ell) + 10.0 * tab3().quad_tol();

    std::vector<std::array<SpikeIndex, 2>> samples = {
        {{{0, 1, 1}, {0, 1, 1}}},          {{{0, 1, 2}, {0, 1, 2}}},
        {{{2, m + 1, 1}, {2, m + 1, 1}}},  {{{1, 8, 1}, {1, 8, 1}}},
        {{{3, m + 6, 2}, {3, m + 6, 2}}},  {{{0, m + 2 * nn, 2}, {0, m + 2 * nn, 2}}},
        {{{0, 3, 1}, {0, 4, 1}}},          {{{0, 3, 1}, {0, 4, 2}}},
        {{{0, 3, 2}, {0, 4, 2}}},          {{{1, 10, 1}, {1, 11, 1}}},
        {{{0, m + 2, 1}, {0, m + 3, 1}}},  {{{0, m + 2, 2}, {0, m + 3, 2}}},
        {{{0, m + 2, 1}, {0, m + 3, 2}}},  {{{0, m + 2 * nn, 1}, {1, m + 1, 1}}},
        {{{0, m + 2 * nn, 2}, {1, m + 1, 2}}}, {{{0, 1, 1}, {1, 1, 1}}},
        {{{0, 1, 2}, {1, 1, 2}}},          {{{0, 1, 1}, {1, 1, 2}}},
        {{{0, 1, 1}, {4, 1, 1}}},          {{{0, 2, 1}, {0, 9, 1}}},
        {{{0, 2, 1}, {0, 9, 2}}},          {{{0, 1, 3}, {0, 1, 3}}},
        {{{0, m + 1, 3}, {0, m + 1, 3}}},  {{{0, m + 6, 3}, {0, m + 6, 3}}},
        {{{2, 5, 3}, {2, 5, 3}}},          {{{0, 5, 3}, {0, 6, 3}}},
        {{{0, m + 2, 3}, {0, m + 3, 3}}},  {{{0, m + 2 * nn, 3}, {1, m + 1, 3}}},
        {{{0, 1, 3}, {1, 1, 3}}},          {{{0, 1, 3}, {3, 1, 3}}},
        {{{0, 3, 3}, {0, 12, 3}}},
    };

    double worst = 0.0;
    for (const auto& pr : samples) {
        bool transverse = pr[0].comp >= 3;
        const BlockMatrix& A = transverse ? H : M;
        auto flat = [&](const SpikeIndex& ix) {
            int base = transverse ? 0 : (ix.comp - 1) * P;
            return base + cfg.index(ix.i, ix.j);
        };
        double assembled = A.dense(flat(pr[0]), flat(pr[1])) * A.scale;
        double expected = entry_oracle(cfg, prof3(), pr[0], pr[1]);
        worst = std::max(worst, std::abs(assembled - expected) / std::abs(A.scale));
    }
    return {worst <= tol_rel, std::to_string(samples.size()) +
                                  " entries, worst rescaled error " + num(worst) +
                                  " (tol " + num(tol_rel) + ")"};
}

// ---- criterion 7 -----------------------------------------------------------

Outcome criterion_schur() {
    SpikeConfiguration cfg = balanced_config(tab3(), 8, 14, 6);
    SigmaConstants sg = sigma_constants(tab3(), cfg.ell, cfg.ell_bar, 8);
    BlockMatrix H = assemble_H_alpha(cfg, sg);
    BlockMatrix M = assemble_M1(cfg, sg);

    double dh = (reduce_H_alpha(H).dense() -
                 dense_schur_reduce(H.dense, vertex_indices_H(cfg)))
                    .cwiseAbs()
                    .maxCoeff();
    double dm = (reduce_M1(M).dense() -
                 dense_schur_reduce(M.dense, vertex_indices_M1(cfg)))
                    .cwiseAbs()
                    .maxCoeff();
    return {dh <= 1e-10 && dm <= 1e-10,
            "transverse " + num(dh) + ", in-plane " + num(dm) + " (tol 1e-10)"};
}

// ---- criterion 8 -----------------------------------------------------------

Outcome criterion_determinants() {
    int k = 7;
    double gap_ratio = 100.0;
    std::vector<std::array<int, 2>> pairs = {{83, 37}, {97, 43}, {175, 77}};
    std::vector<double> ells, worst_di, worst_fj;
    bool zeros_ok = true;

    for (auto [m, n] : pairs) {
        SpikeConfiguration cfg = balanced_config(tab3(), k, m, n);
        SigmaConstants sg = sigma_constants(tab3(), cfg.ell, cfg.ell_bar, k);
        ells.push_back(cfg.ell);

        std::vector<DetComparison> di, fj;
        {
            BlockMatrix H = assemble_H_alpha(cfg, sg);
            di = compare_Di(reduce_H_alpha(H), sg, n);
        }
        {
            BlockMatrix M = assemble_M1(cfg, sg);
            fj = compare_Dfj(reduce_M1(M), sg, n);
        }

        for (const auto* table : {&di, &fj}) {
            double mx = 0.0;
            for (const auto& row : *table)
                mx = std::max(mx, std::abs(row.det_numeric));
            for (int z : {0, 1, k - 1})
                zeros_ok = zeros_ok &&
                           std::abs((*table)[z].det_numeric) <= mx / gap_ratio;
        }
        double wd = 0.0, wf = 0.0;
        for (int j = 2; j <= k - 2; ++j) {
            wd = std::max(wd, di[j].rel_err);
            wf = std::max(wf, fj[j].rel_err);
        }
        worst_di.push_back(wd);
        worst_fj.push_back(wf);
    }

    bool first_ok = worst_di[0] <= 0.5 && worst_fj[0] <= 0.5;
    bool monotone = worst_di[0] > worst_di[1] && worst_di[1] > worst_di[2] &&
                    worst_fj[0] > worst_fj[1] && worst_fj[1] > worst_fj[2];
    std::ostringstream d;
    d << "ell " << num(ells[0]) << "/" << num(ells[1]) << "/" << num(ells[2])
      << ": transverse rel err " << num(worst_di[0]) << "/" << num(worst_di[1])
      << "/" << num(worst_di[2]) << ", in-plane " << num(worst_fj[0]) << "/"
      << num(worst_fj[1]) << "/" << num(worst_fj[2])
      << (zeros_ok ? "; symmetry zeros ok" : "; symmetry zeros TOO LARGE");
    return {zeros_ok && first_ok && monotone, d.str()};
}

// ---- criterion 9 -----------------------------------------------------------

Outcome criterion_kernels_certified() {
    SpikeConfiguration cfg = balanced_config(tab3(), 8, 14, 6);
    NondegeneracyReport rep = nondegeneracy_report(cfg, tab3(), 3);

    double worst_angle = 0.0;
    for (double a : rep.m1.principal_angles) worst_angle = std::max(worst_angle, a);
    for (const auto& h : rep.h_alpha)
        for (double a : h.principal_angles) worst_angle = std::max(worst_angle, a);

    bool aligned = rep.m1.kernel_dim == 3 && rep.h_alpha.size() == 1 &&
                   rep.h_alpha[0].kernel_dim == 3 &&
                   rep.total_kernel_dim == rep.expected_kernel_dim &&
                   worst_angle <= 1e-4 && rep.min_gap_residual_ratio >= 100.0 &&
                   rep.pass;

    // a one-percent detuning of the outer spacing must break the verdict
    SpikeConfiguration off =
        build_configuration(8, 14, 6, cfg.ell, cfg.ell_bar * 1.01, 0.2);
    NondegeneracyReport bad = nondegeneracy_report(off, tab3(), 3);

    return {aligned && !bad.pass,
            "kernels 3+3 of " + std::to_string(rep.expected_kernel_dim) +
                ", worst angle " + num(worst_angle) + " rad, gap/residual " +
                num(rep.min_gap_residual_ratio) + "; detuned control " +
                (bad.pass ? "STILL PASSES" : "fails as required")};
}

// ---- criterion 10 ----------------------------------------------------------

Outcome criterion_reproducible() {
    fs::path root = fs::temp_directory_path() / "spike_acceptance";
    fs::remove_all(root);
    RunConfig cfg;
    cfg.dim = 2;
    cfg.exponent = 3.0;
    cfg.k = 8;
    cfg.m = 14;
    cfg.n = 6;
    cfg.s_min = 8.0;
    cfg.s_max = 12.0;
    cfg.r_max = 30.0;

    std::vector<std::string> files = {"profile.json", "kernels.csv", "config.json",
                                      "M1.csv",       "M1_manifest.json",
                                      "dets_M1.csv",  "gaps.csv",
                                      "spectral_report.json"};
    RunConfig a = cfg, b = cfg;
    a.out_dir = (root / "a").string();
    b.out_dir = (root / "b").string();
    fs::create_directories(a.out_dir);
    fs::create_directories(b.out_dir);
    PipelineResult ra = run_pipeline(a);
    PipelineResult rb = run_pipeline(b);

    int identical = 0;
    for (const auto& f : files)
        if (slurp(fs::path(a.out_dir) / f) == slurp(fs::path(b.out_dir) / f))
            ++identical;
    bool ok = ra.pass && rb.pass && identical == static_cast<int>(files.size());
    return {ok, std::to_string(identical) + "/" + std::to_string(files.size()) +
                    " artifacts bitwise identical, both runs " +
                    (ra.pass && rb.pass ? "PASS" : "not passing")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria = {
        {1, "ground state matches the closed-form line soliton", criterion_ground_state},
        {2, "tridiagonal inverses, circulant spectra, DFT unitarity", criterion_structured},
        {3, "pair integrals decompose into the projection kernels", criterion_projection},
        {4, "far-field decay rate and amplitude of the kernels", criterion_far_field},
        {5, "balanced spacings solve both relations, offset shrinks like 1/ell",
         criterion_balance},
        {6, "assembled entries match direct quadrature", criterion_entry_oracle},
        {7, "closed-form eliminations match dense Schur complements", criterion_schur},
        {8, "frequency determinants: symmetry zeros and closed forms",
         criterion_determinants},
        {9, "kernel spaces certified and aligned, detuned control fails",
         criterion_kernels_certified},
        {10, "identical run configuration gives bitwise identical artifacts",
         criterion_reproducible},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        if (!out.ok) ++failures;
        std::printf("%s  criterion %2d: %s  [%s]\n", out.ok ? "PASS" : "FAIL", c.id,
                    c.label, out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
