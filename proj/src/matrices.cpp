#include "spike_spectra/matrices.hpp"

#include <cmath>

namespace spikes {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline Vec2 unit_between(const Vec2& a, const Vec2& b, double* dist) {
    double dx = b[0] - a[0], dy = b[1] - a[1];
    double d = std::hypot(dx, dy);
    *dist = d;
    return {dx / d, dy / d};
}

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

inline Vec2 perp(const Vec2& e) { return {-e[1], e[0]}; }

void check_compatible(const SpikeConfiguration& config, const SigmaConstants& sigmas) {
    if (config.k != sigmas.k)
        throw LayoutMismatch("configuration k=" + std::to_string(config.k) +
                             " vs sigma constants k=" + std::to_string(sigmas.k));
    if (std::abs(config.ell - sigmas.ell) > 1e-9 * std::max(1.0, config.ell) ||
        std::abs(config.ell_bar - sigmas.ell_bar) >
            1e-9 * std::max(1.0, config.ell_bar))
        throw LayoutMismatch("configuration spacings differ from sigma constants");
}

}  // namespace

std::vector<Edge> neighbor_edges(const SpikeConfiguration& config) {
    std::vector<Edge> edges;
    int k = config.k, m = config.m, n = config.n;
    edges.reserve(k * (m + 2 * n + 1));
    for (int i = 0; i < k; ++i) {
        for (int j = 1; j <= m; ++j)
            edges.push_back({config.index(i, j), config.index(i, j + 1), false});
        for (int j = m + 1; j < m + 2 * n; ++j)
            edges.push_back({config.index(i, j), config.index(i, j + 1), true});
        edges.push_back(
            {config.index(i, m + 2 * n), config.index((i + 1) % k, m + 1), true});
        edges.push_back({config.index(i, 1), config.index((i + 1) % k, 1), true});
    }
    return edges;
}

BlockMatrix assemble_H_alpha(const SpikeConfiguration& config,
                             const SigmaConstants& sigmas) {
    check_compatible(config, sigmas);
    int P = config.spike_count();
    double s = std::sin(kPi / config.k);
    double c_ell = 1.0;
    double c_bar = sigmas.delta2 / (2.0 * s);

    BlockMatrix out;
    out.id = "Halpha";
    out.scale = sigmas.psi2_ell;
    out.k = config.k;
    out.m = config.m;
    out.n = config.n;
    out.components = 1;
    out.sigmas = sigmas;
    out.dense = Eigen::MatrixXd::Zero(P, P);

    for (const Edge& e : neighbor_edges(config)) {
        double coeff = (e.outer ? c_bar : c_ell) *
                       config.points[e.a].sign * config.points[e.b].sign;
        out.dense(e.a, e.b) += coeff;
        out.dense(e.b, e.a) += coeff;
        out.dense(e.a, e.a) -= coeff;
        out.dense(e.b, e.b) -= coeff;
    }
    return out;
}

BlockMatrix assemble_M1(const SpikeConfiguration& config,
                        const SigmaConstants& sigmas) {
    check_compatible(config, sigmas);
    int P = config.spike_count();
    double s = std::sin(kPi / config.k);
    double r1_ell = 1.0, r1_bar = sigmas.sigma3 / (2.0 * s);
    double r2_ell = sigmas.d1(), r2_bar = sigmas.sigma3 * sigmas.d2() / (2.0 * s);

    BlockMatrix out;
    out.id = "M1";
    out.scale = -sigmas.psi1_ell;
    out.k = config.k;
    out.m = config.m;
    out.n = config.n;
    out.components = 2;
    out.sigmas = sigmas;
    out.dense = Eigen::MatrixXd::Zero(2 * P, 2 * P);

    for (const Edge& edge : neighbor_edges(config)) {
        double d = 0.0;
        Vec2 e = unit_between(config.points[edge.a].center,
                              config.points[edge.b].center, &d);
        Vec2 ep = perp(e);
        double r1 = edge.outer ? r1_bar : r1_ell;
        double r2 = edge.outer ? r2_bar : r2_ell;
        double chi = config.points[edge.a].sign * config.points[edge.b].sign;
        auto ua = config.spike_frame(edge.a);
        auto ub = config.spike_frame(edge.b);
        for (int alpha = 0; alpha < 2; ++alpha) {
            for (int beta = 0; beta < 2; ++beta) {
                double off = chi * (dot(ua[alpha], e) * dot(ub[beta], e) * r1 -
                                    dot(ua[alpha], ep) * dot(ub[beta], ep) * r2);
                out.dense(alpha * P + edge.a, beta * P + edge.b) += off;
                out.dense(beta * P + edge.b, alpha * P + edge.a) += off;
                double diag_a =
                    chi * (dot(ua[alpha], e) * dot(ua[beta], e) * r1 -
                           dot(ua[alpha], ep) * dot(ua[beta], ep) * r2);
                double diag_b =
                    chi * (dot(ub[alpha], e) * dot(ub[beta], e) * r1 -
                           dot(ub[alpha], ep) * dot(ub[beta], ep) * r2);
                out.dense(alpha * P + edge.a, beta * P + edge.a) -= diag_a;
                out.dense(alpha * P + edge.b, beta * P + edge.b) -= diag_b;
            }
        }
    }
    return out;
}

namespace {

Circulant cir_zero(int k) { return Circulant{std::vector<double>(k, 0.0)}; }

Circulant cir_diag(int k, double diag, double off) {
    Circulant c = cir_zero(k);
    c.first_row[0] = diag;
    c.first_row[1] += off;
    c.first_row[k - 1] += off;
    return c;
}

Circulant cir_skew(int k, double at1) {
    Circulant c = cir_zero(k);
    c.first_row[1] = at1;
    c.first_row[k - 1] = -at1;
    return c;
}

Circulant cir_scalar(int k, double diag) {
    Circulant c = cir_zero(k);
    c.first_row[0] = diag;
    return c;
}

Circulant transpose(const Circulant& c) {
    int k = c.dim();
    Circulant out = cir_zero(k);
    for (int l = 0; l < k; ++l) out.first_row[l] = c.first_row[(k - l) % k];
    return out;
}

}  // namespace

BlockCirculant reduce_H_alpha(const BlockMatrix& H) {
    if (H.id != "Halpha")
        throw LayoutMismatch("reduce_H_alpha expects an H-family matrix, got " + H.id);
    int k = H.k;
    double s = std::sin(kPi / k);
    double d2 = H.sigmas.delta2;
    double mu = 1.0 / H.m;
    double eta = 1.0 / (2.0 * H.n);

    BlockCirculant out;
    out.k = k;
    out.q = 2;
    out.blocks.resize(4, cir_zero(k));
    out.blocks[0 * 2 + 0] = cir_diag(k, -mu - d2 / s, d2 / (2.0 * s));
    out.blocks[0 * 2 + 1] = cir_scalar(k, mu);
    out.blocks[1 * 2 + 0] = cir_scalar(k, mu);
    out.blocks[1 * 2 + 1] =
        cir_diag(k, -mu + d2 * eta / s, -d2 * eta / (2.0 * s));
    return out;
}

BlockCirculant reduce_M1(const BlockMatrix& M) {
    if (M.id != "M1")
        throw LayoutMismatch("reduce_M1 expects the in-plane matrix, got " + M.id);
    int k = M.k;
    double s = std::sin(kPi / k), c = std::cos(kPi / k);
    double s2 = s * s, c2 = c * c;
    double g = M.sigmas.sigma3;
    double e = M.sigmas.d2();
    double d = M.sigmas.d1();
    double mu = 1.0 / M.m;
    double eta = 1.0 / (2.0 * M.n);
    double q1 = 0.5 * c * g * (1.0 - e);
    double q2 = q1 * eta;

    BlockCirculant out;
    out.k = k;
    out.q = 4;
    out.blocks.resize(16, cir_zero(k));
    auto set = [&](int u, int v, const Circulant& blk) { out.blocks[u * 4 + v] = blk; };

    Circulant F11 = cir_diag(k, -mu - (g / s) * (s2 - c2 * e),
                             -(g / (2.0 * s)) * (s2 + c2 * e));
    Circulant F22 = cir_diag(k, -mu + (g * eta / s) * (s2 - c2 * e),
                             (g * eta / (2.0 * s)) * (s2 + c2 * e));
    Circulant F33 = cir_diag(k, d * mu - (g / s) * (c2 - s2 * e),
                             (g / (2.0 * s)) * (c2 + s2 * e));
    Circulant F44 = cir_diag(k, d * mu + (g * eta / s) * (c2 - s2 * e),
                             -(g * eta / (2.0 * s)) * (c2 + s2 * e));
    Circulant F12 = cir_scalar(k, mu);
    Circulant F34 = cir_scalar(k, -d * mu);
    Circulant F13 = cir_skew(k, q1);
    Circulant F24 = cir_skew(k, -q2);

    set(0, 0, F11);
    set(0, 1, F12);
    set(0, 2, F13);
    set(1, 0, F12);
    set(1, 1, F22);
    set(1, 3, F24);
    set(2, 0, transpose(F13));
    set(2, 2, F33);
    set(2, 3, F34);
    set(3, 1, transpose(F24));
    set(3, 2, F34);
    set(3, 3, F44);
    return out;
}

Eigen::MatrixXd dense_schur_reduce(const Eigen::MatrixXd& A,
                                   const std::vector<int>& keep) {
    int N = static_cast<int>(A.rows());
    if (A.cols() != N) throw LayoutMismatch("schur reduction needs a square matrix");
    std::vector<char> is_kept(N, 0);
    for (int idx : keep) {
        if (idx < 0 || idx >= N)
            throw LayoutMismatch("keep index " + std::to_string(idx) + " out of range");
        if (is_kept[idx]) throw LayoutMismatch("duplicate keep index");
        is_kept[idx] = 1;
    }
    std::vector<int> drop;
    drop.reserve(N - keep.size());
    for (int i = 0; i < N; ++i)
        if (!is_kept[i]) drop.push_back(i);

    int nk = static_cast<int>(keep.size()), nd = static_cast<int>(drop.size());
    Eigen::MatrixXd Akk(nk, nk), Akd(nk, nd), Adk(nd, nk), Add(nd, nd);
    for (int a = 0; a < nk; ++a) {
        for (int b = 0; b < nk; ++b) Akk(a, b) = A(keep[a], keep[b]);
        for (int b = 0; b < nd; ++b) Akd(a, b) = A(keep[a], drop[b]);
    }
    for (int a = 0; a < nd; ++a) {
        for (int b = 0; b < nk; ++b) Adk(a, b) = A(drop[a], keep[b]);
        for (int b = 0; b < nd; ++b) Add(a, b) = A(drop[a], drop[b]);
    }
    if (nd == 0) return Akk;
    return Akk - Akd * Add.partialPivLu().solve(Adk);
}

std::vector<int> vertex_indices_H(const SpikeConfiguration& config) {
    std::vector<int> keep;
    keep.reserve(2 * config.k);
    for (int i = 0; i < config.k; ++i) keep.push_back(config.index(i, 1));
    for (int i = 0; i < config.k; ++i) keep.push_back(config.index(i, config.m + 1));
    return keep;
}

std::vector<int> vertex_indices_M1(const SpikeConfiguration& config) {
    int P = config.spike_count();
    std::vector<int> keep;
    keep.reserve(4 * config.k);
    for (int comp = 0; comp < 2; ++comp) {
        for (int i = 0; i < config.k; ++i)
            keep.push_back(comp * P + config.index(i, 1));
        for (int i = 0; i < config.k; ++i)
            keep.push_back(comp * P + config.index(i, config.m + 1));
    }
    return keep;
}

KernelBasis build_symmetry_kernels(const SpikeConfiguration& config) {
    int P = config.spike_count();
    KernelBasis kb;
    kb.w1.assign(2 * P, 0.0);
    kb.w2.assign(2 * P, 0.0);
    kb.w3.assign(2 * P, 0.0);
    kb.w4.assign(P, 1.0);
    kb.w5.assign(P, 0.0);
    kb.w6.assign(P, 0.0);
    for (int a = 0; a < P; ++a) {
        auto u = config.spike_frame(a);
        const Vec2& y = config.points[a].center;
        Vec2 jy{-y[1], y[0]};
        for (int alpha = 0; alpha < 2; ++alpha) {
            kb.w1[alpha * P + a] = u[alpha][0];
            kb.w2[alpha * P + a] = u[alpha][1];
            kb.w3[alpha * P + a] = dot(u[alpha], jy);
        }
        kb.w5[a] = y[0];
        kb.w6[a] = y[1];
    }
    return kb;
}

namespace {

// Signed physical pair value between distinct spikes a, b for components
// (alpha, beta); transverse rows use the axisymmetric kernel, in-plane rows
// the full projection quadrature.
double pair_value(const SpikeConfiguration& config, const RadialProfile& profile,
                  int a, int alpha, int b, int beta, const QuadratureOptions& quad) {
    bool row_plane = alpha <= 2, col_plane = beta <= 2;
    if (row_plane != col_plane) return 0.0;  // in-plane vs transverse decouple
    double chi = config.points[a].sign * config.points[b].sign;
    double d = 0.0;
    Vec2 e = unit_between(config.points[a].center, config.points[b].center, &d);
    if (!row_plane) {
        if (alpha != beta) return 0.0;  // orthogonal transverse directions
        return chi * kernels_at(profile, d, quad).psi2;
    }
    Vec2 ua = config.spike_frame(a)[alpha - 1];
    Vec2 ub = config.spike_frame(b)[beta - 1];
    return chi * interaction_projection(profile, ua, ub, d, e, quad);
}

}  // namespace

double entry_oracle(const SpikeConfiguration& config, const RadialProfile& profile,
                    const SpikeIndex& row, const SpikeIndex& col,
                    const QuadratureOptions& quad) {
    if (row.comp < 1 || col.comp < 1)
        throw LayoutMismatch("component labels are 1-based");
    if ((row.comp <= 2) != (col.comp <= 2)) return 0.0;
    if (row.comp >= 3 && col.comp >= 3 && row.comp != col.comp)
        return 0.0;
    int a = config.index(row.i, row.j);
    int b = config.index(col.i, col.j);
    if (a != b) return pair_value(config, profile, a, row.comp, b, col.comp, quad);

    double sum = 0.0;
    for (const Edge& edge : neighbor_edges(config)) {
        int other = -1;
        if (edge.a == a) other = edge.b;
        if (edge.b == a) other = edge.a;
        if (other < 0) continue;
        // Same-spike frame on both slots: the diagonal block accumulates the
        // projections of spike a's own displacement against each neighbor.
        bool row_plane = row.comp <= 2;
        double chi = config.points[a].sign * config.points[other].sign;
        double d = 0.0;
        Vec2 e = unit_between(config.points[a].center, config.points[other].center, &d);
        if (!row_plane) {
            sum += chi * kernels_at(profile, d, quad).psi2;
        } else {
            Vec2 ua = config.spike_frame(a)[row.comp - 1];
            Vec2 ub = config.spike_frame(a)[col.comp - 1];
            sum += chi * interaction_projection(profile, ua, ub, d, e, quad);
        }
    }
    return -sum;
}

}  // namespace spikes
