#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "spike_spectra/configuration.hpp"
#include "spike_spectra/ground_state.hpp"
#include "spike_spectra/kernels.hpp"
#include "spike_spectra/matrices.hpp"

using namespace spikes;

namespace {

const double kPi = 3.14159265358979323846;

const RadialProfile& profile2() {
    static RadialProfile p = solve_ground_state({2, 3.0});
    return p;
}

const KernelTable& table2() {
    static KernelTable t = build_kernel_table(profile2(), 6.0, 24.0, 33);
    return t;
}

const SpikeConfiguration& config86() {
    static SpikeConfiguration c = [] {
        BalanceResult b = solve_balancing(table2(), 8, 14, 6);
        return build_configuration(8, 14, 6, b.ell, b.ell_bar);
    }();
    return c;
}

const SigmaConstants& sigmas86() {
    static SigmaConstants s =
        sigma_constants(table2(), config86().ell, config86().ell_bar, 8);
    return s;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double apply_residual(const Eigen::MatrixXd& A, const std::vector<double>& v) {
    Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<long>(v.size()));
    return (A * x).cwiseAbs().maxCoeff() / inf_norm(v);
}

}  // namespace

TEST_CASE("dense Schur elimination agrees with hand arithmetic") {
    Eigen::MatrixXd A(2, 2);
    A << 2.0, 1.0, 1.0, 2.0;
    Eigen::MatrixXd R = dense_schur_reduce(A, {0});
    REQUIRE(R.rows() == 1);
    CHECK(R(0, 0) == doctest::Approx(1.5).epsilon(1e-14));

    Eigen::MatrixXd B(3, 3);
    B << 4.0, 1.0, 0.0,
         1.0, 3.0, 1.0,
         0.0, 1.0, 4.0;
    // eliminating the middle unknown: corners pick up -1/3, coupling 4 - ...
    Eigen::MatrixXd S = dense_schur_reduce(B, {0, 2});
    REQUIRE(S.rows() == 2);
    CHECK(S(0, 0) == doctest::Approx(4.0 - 1.0 / 3.0).epsilon(1e-14));
    CHECK(S(0, 1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(S(1, 0) == doctest::Approx(S(0, 1)).epsilon(1e-14));
    CHECK(S(1, 1) == doctest::Approx(4.0 - 1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("neighbor edge census and spacing classes") {
    const SpikeConfiguration& cfg = config86();
    std::vector<Edge> edges = neighbor_edges(cfg);
    int k = cfg.k, m = cfg.m, n = cfg.n;
    CHECK(static_cast<int>(edges.size()) == k * (m + 2 * n + 1));
    int outer = 0;
    for (const Edge& e : edges) {
        REQUIRE(e.a >= 0);
        REQUIRE(e.a < cfg.spike_count());
        REQUIRE(e.b >= 0);
        REQUIRE(e.b < cfg.spike_count());
        const Vec2& pa = cfg.points[e.a].center;
        const Vec2& pb = cfg.points[e.b].center;
        double dist = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
        if (e.outer) {
            ++outer;
            CHECK(dist == doctest::Approx(cfg.ell_bar).epsilon(1e-9));
        } else {
            CHECK(dist == doctest::Approx(cfg.ell).epsilon(1e-9));
        }
    }
    // per ray: 2n-1 outer-chain links, one wrap, one inner-ring edge
    CHECK(outer == k * (2 * n + 1));
}

TEST_CASE("transverse matrix has the documented row structure") {
    const SpikeConfiguration& cfg = config86();
    BlockMatrix H = assemble_H_alpha(cfg, sigmas86());
    int P = cfg.spike_count();
    REQUIRE(H.dense.rows() == P);
    REQUIRE(H.components == 1);
    CHECK(H.scale == doctest::Approx(table2().psi2_of(cfg.ell)).epsilon(1e-12));
    CHECK((H.dense - H.dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    double cbar = sigmas86().delta2 / (2.0 * std::sin(kPi / cfg.k));
    auto at = [&](int i, int j) { return cfg.index(i, j); };

    // ray interior: unit couplings to both chain neighbors
    CHECK(H.dense(at(0, 5), at(0, 5)) == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(H.dense(at(0, 5), at(0, 4)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(H.dense(at(0, 5), at(0, 6)) == doctest::Approx(1.0).epsilon(1e-13));

    // inner vertex: ray link plus two ring links, all plus signs
    CHECK(H.dense(at(0, 1), at(0, 1)) ==
          doctest::Approx(-1.0 - 2.0 * cbar).epsilon(1e-12));
    CHECK(H.dense(at(0, 1), at(1, 1)) == doctest::Approx(cbar).epsilon(1e-12));
    CHECK(H.dense(at(0, 1), at(7, 1)) == doctest::Approx(cbar).epsilon(1e-12));

    // outer vertex: alternating signs flip the two ell_bar links
    CHECK(H.dense(at(0, cfg.m + 1), at(0, cfg.m + 1)) ==
          doctest::Approx(-1.0 + 2.0 * cbar).epsilon(1e-12));
    CHECK(H.dense(at(0, cfg.m + 1), at(0, cfg.m + 2)) ==
          doctest::Approx(-cbar).epsilon(1e-12));

    // outer chain interior: sign flips make the diagonal positive
    CHECK(H.dense(at(0, cfg.m + 3), at(0, cfg.m + 3)) ==
          doctest::Approx(2.0 * cbar).epsilon(1e-12));
    CHECK(H.dense(at(0, cfg.m + 3), at(0, cfg.m + 2)) ==
          doctest::Approx(-cbar).epsilon(1e-12));

    // non-neighbors are exact zeros in the truncated model
    CHECK(H.dense(at(0, 1), at(4, 1)) == 0.0);
    CHECK(H.dense(at(0, 2), at(0, 9)) == 0.0);
}

TEST_CASE("in-plane matrix shape, symmetry, and truncation zeros") {
    const SpikeConfiguration& cfg = config86();
    BlockMatrix M = assemble_M1(cfg, sigmas86());
    int P = cfg.spike_count();
    REQUIRE(M.dense.rows() == 2 * P);
    REQUIRE(M.components == 2);
    CHECK(M.scale < 0.0);
    CHECK(-M.scale == doctest::Approx(table2().psi1_of(cfg.ell)).epsilon(1e-12));
    CHECK((M.dense - M.dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    auto at = [&](int i, int j, int comp) {
        return (comp - 1) * P + cfg.index(i, j);
    };
    // the radial ray coupling is normalized to one
    CHECK(M.dense(at(0, 5, 1), at(0, 6, 1)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(M.dense(at(0, 5, 1), at(2, 5, 1)) == 0.0);
    CHECK(M.dense(at(0, 5, 1), at(2, 5, 2)) == 0.0);
    CHECK(M.dense(at(0, 1, 1), at(3, 1, 2)) == 0.0);
}

TEST_CASE("symmetry modes annihilate the assembled matrices") {
    const SpikeConfiguration& cfg = config86();
    BlockMatrix M = assemble_M1(cfg, sigmas86());
    BlockMatrix H = assemble_H_alpha(cfg, sigmas86());
    KernelBasis basis = build_symmetry_kernels(cfg);

    REQUIRE(basis.w1.size() == static_cast<size_t>(2 * cfg.spike_count()));
    REQUIRE(basis.w4.size() == static_cast<size_t>(cfg.spike_count()));

    // translations and the transverse constant cancel edge by edge
    CHECK(apply_residual(M.dense, basis.w1) <= 1e-11);
    CHECK(apply_residual(M.dense, basis.w2) <= 1e-11);
    CHECK(apply_residual(H.dense, basis.w4) <= 1e-11);
    // the rotation family needs the balanced spacings
    CHECK(apply_residual(M.dense, basis.w3) <= 1e-11);
    CHECK(apply_residual(H.dense, basis.w5) <= 1e-11);
    CHECK(apply_residual(H.dense, basis.w6) <= 1e-11);
}

TEST_CASE("detuned spacings keep translations but break the rotations") {
    const SpikeConfiguration& balanced = config86();
    double ell = balanced.ell, ell_bar = balanced.ell_bar * 1.005;
    SpikeConfiguration cfg = build_configuration(8, 14, 6, ell, ell_bar, 0.2);
    SigmaConstants s = sigma_constants(table2(), ell, ell_bar, 8);
    BlockMatrix M = assemble_M1(cfg, s);
    BlockMatrix H = assemble_H_alpha(cfg, s);
    KernelBasis basis = build_symmetry_kernels(cfg);

    CHECK(apply_residual(M.dense, basis.w1) <= 1e-11);
    CHECK(apply_residual(M.dense, basis.w2) <= 1e-11);
    CHECK(apply_residual(H.dense, basis.w4) <= 1e-11);
    CHECK(apply_residual(M.dense, basis.w3) >= 1e-6);
    CHECK(apply_residual(H.dense, basis.w5) >= 1e-6);
    CHECK(apply_residual(H.dense, basis.w6) >= 1e-6);
}

TEST_CASE("assembled entries match the direct quadrature oracle") {
    const SpikeConfiguration& cfg = config86();
    const RadialProfile& prof = profile2();
    BlockMatrix M = assemble_M1(cfg, sigmas86());
    BlockMatrix H = assemble_H_alpha(cfg, sigmas86());
    int P = cfg.spike_count();
    int m = cfg.m, nn = cfg.n;
    double quad_tol = 1e-9;
    double tol_rel = 5.0 * std::exp(-0.3 * cfg.ell) + 10.0 * quad_tol;

    struct Pair {
        SpikeIndex row, col;
    };
    std::vector<Pair> samples = {
        // in-plane diagonal entries at each structural role
        {{0, 1, 1}, {0, 1, 1}},
        {{0, 1, 2}, {0, 1, 2}},
        {{2, m + 1, 1}, {2, m + 1, 1}},
        {{1, 8, 1}, {1, 8, 1}},
        {{3, m + 6, 2}, {3, m + 6, 2}},
        {{0, m + 2 * nn, 2}, {0, m + 2 * nn, 2}},
        // ray chain links
        {{0, 3, 1}, {0, 4, 1}},
        {{0, 3, 1}, {0, 4, 2}},
        {{0, 3, 2}, {0, 4, 2}},
        {{1, 10, 1}, {1, 11, 1}},
        // outer chain links
        {{0, m + 2, 1}, {0, m + 3, 1}},
        {{0, m + 2, 2}, {0, m + 3, 2}},
        {{0, m + 2, 1}, {0, m + 3, 2}},
        // wrap link between consecutive rays
        {{0, m + 2 * nn, 1}, {1, m + 1, 1}},
        {{0, m + 2 * nn, 2}, {1, m + 1, 2}},
        // inner ring links
        {{0, 1, 1}, {1, 1, 1}},
        {{0, 1, 2}, {1, 1, 2}},
        {{0, 1, 1}, {1, 1, 2}},
        // distant pairs: the assembly truncates them to zero
        {{0, 1, 1}, {4, 1, 1}},
        {{0, 2, 1}, {0, 9, 1}},
        {{0, 2, 1}, {0, 9, 2}},
        // transverse diagonal entries
        {{0, 1, 3}, {0, 1, 3}},
        {{0, m + 1, 3}, {0, m + 1, 3}},
        {{0, m + 6, 3}, {0, m + 6, 3}},
        {{2, 5, 3}, {2, 5, 3}},
        // transverse links of every class
        {{0, 5, 3}, {0, 6, 3}},
        {{0, m + 2, 3}, {0, m + 3, 3}},
        {{0, m + 2 * nn, 3}, {1, m + 1, 3}},
        {{0, 1, 3}, {1, 1, 3}},
        // distant transverse pairs
        {{0, 1, 3}, {3, 1, 3}},
        {{0, 3, 3}, {0, 12, 3}},
    };
    REQUIRE(samples.size() >= 30);

    int tight = 0;
    for (const Pair& pr : samples) {
        bool transverse = pr.row.comp >= 3;
        const BlockMatrix& A = transverse ? H : M;
        auto flat = [&](const SpikeIndex& ix) {
            int base = transverse ? 0 : (ix.comp - 1) * P;
            return base + cfg.index(ix.i, ix.j);
        };
        double assembled = A.dense(flat(pr.row), flat(pr.col)) * A.scale;
        double expected = entry_oracle(cfg, prof, pr.row, pr.col);
        double err = std::abs(assembled - expected);
        CHECK(err <= tol_rel * std::abs(A.scale));
        if (err <= 1e-5 * std::abs(A.scale)) ++tight;
    }
    // retained entries agree far better than the stated envelope;
    // only the truncated distant pairs use the slack
    CHECK(tight >= static_cast<int>(samples.size()) - 6);
}

TEST_CASE("closed-form reductions reproduce the dense Schur complements") {
    const SpikeConfiguration& cfg = config86();
    BlockMatrix H = assemble_H_alpha(cfg, sigmas86());
    BlockMatrix M = assemble_M1(cfg, sigmas86());

    BlockCirculant RH = reduce_H_alpha(H);
    REQUIRE(RH.q == 2);
    REQUIRE(RH.k == cfg.k);
    Eigen::MatrixXd DH = dense_schur_reduce(H.dense, vertex_indices_H(cfg));
    CHECK((RH.dense() - DH).cwiseAbs().maxCoeff() <= 1e-10);

    BlockCirculant RM = reduce_M1(M);
    REQUIRE(RM.q == 4);
    Eigen::MatrixXd DM = dense_schur_reduce(M.dense, vertex_indices_M1(cfg));
    CHECK((RM.dense() - DM).cwiseAbs().maxCoeff() <= 1e-10);

    // the eliminated systems stay block circulant
    CHECK_NOTHROW(to_block_circulant(DH, cfg.k, 2, 1e-8));
    CHECK_NOTHROW(to_block_circulant(DM, cfg.k, 4, 1e-8));
}

TEST_CASE("reduced block values at the octagonal balance point") {
    BlockCirculant RH = reduce_H_alpha(assemble_H_alpha(config86(), sigmas86()));
    BlockCirculant RM = reduce_M1(assemble_M1(config86(), sigmas86()));
    int k = config86().k, m = config86().m;

    auto fr = [&](const BlockCirculant& B, int u, int v) {
        return B.block(u, v).first_row;
    };

    CHECK(fr(RH, 0, 0)[0] == doctest::Approx(-2.7540249419).epsilon(1e-3));
    CHECK(fr(RH, 0, 0)[1] == doctest::Approx(1.3412981852).epsilon(1e-3));
    CHECK(fr(RH, 0, 0)[k - 1] == doctest::Approx(fr(RH, 0, 0)[1]).epsilon(1e-12));
    // chains of length m couple the two rings with weight 1/m
    CHECK(fr(RH, 0, 1)[0] == doctest::Approx(1.0 / m).epsilon(1e-9));
    CHECK(fr(RH, 1, 1)[0] == doctest::Approx(0.1521211261).epsilon(1e-3));
    CHECK(fr(RH, 1, 1)[1] == doctest::Approx(-0.1117748488).epsilon(1e-3));

    CHECK(fr(RM, 0, 0)[0] == doctest::Approx(-0.2327579402).epsilon(1e-3));
    CHECK(fr(RM, 0, 0)[1] == doctest::Approx(-0.3025782074).epsilon(1e-3));
    CHECK(fr(RM, 0, 1)[0] == doctest::Approx(1.0 / m).epsilon(1e-9));
    CHECK(fr(RM, 1, 1)[0] == doctest::Approx(-0.0579844574).epsilon(1e-3));
    CHECK(fr(RM, 1, 1)[1] == doctest::Approx(0.0252148506).epsilon(1e-3));
    CHECK(fr(RM, 2, 2)[0] == doctest::Approx(-2.1887063173).epsilon(1e-3));
    CHECK(fr(RM, 2, 2)[1] == doctest::Approx(1.1358888036).epsilon(1e-3));
    CHECK(fr(RM, 3, 3)[0] == doctest::Approx(0.1898916846).epsilon(1e-3));
    CHECK(fr(RM, 3, 3)[1] == doctest::Approx(-0.0946574003).epsilon(1e-3));

    // rotation couplings between the component families are ring skews
    CHECK(std::abs(fr(RM, 0, 2)[1]) == doctest::Approx(0.4166552981).epsilon(1e-3));
    CHECK(fr(RM, 0, 2)[k - 1] == doctest::Approx(-fr(RM, 0, 2)[1]).epsilon(1e-9));
    CHECK(std::abs(fr(RM, 0, 2)[0]) <= 1e-12);
    CHECK(std::abs(fr(RM, 1, 3)[1]) == doctest::Approx(0.0347212748).epsilon(1e-3));
    CHECK(fr(RM, 1, 3)[k - 1] == doctest::Approx(-fr(RM, 1, 3)[1]).epsilon(1e-9));

    // the ray-chain coupling of the tangential vertex pair
    double best = 0.0;
    for (double x : fr(RM, 2, 3)) {
        if (std::abs(x) > std::abs(best)) best = x;
    }
    CHECK(best == doctest::Approx(-0.0069226075).epsilon(1e-3));
}

TEST_CASE("layout guards reject mismatched inputs") {
    const SpikeConfiguration& cfg = config86();
    BlockMatrix H = assemble_H_alpha(cfg, sigmas86());
    BlockMatrix M = assemble_M1(cfg, sigmas86());
    CHECK_THROWS_AS(reduce_H_alpha(M), LayoutMismatch);
    CHECK_THROWS_AS(reduce_M1(H), LayoutMismatch);

    SigmaConstants shifted =
        sigma_constants(table2(), cfg.ell + 0.5, cfg.ell_bar, 8);
    CHECK_THROWS_AS(assemble_M1(cfg, shifted), LayoutMismatch);

    std::vector<int> keepH = vertex_indices_H(cfg);
    std::vector<int> keepM = vertex_indices_M1(cfg);
    CHECK(static_cast<int>(keepH.size()) == 2 * cfg.k);
    CHECK(static_cast<int>(keepM.size()) == 4 * cfg.k);
}
