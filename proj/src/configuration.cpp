#include "spike_spectra/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spikes {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int SpikeConfiguration::index(int i, int j) const {
    if (i < 0 || i >= k || j < 1 || j > m + 2 * n)
        throw ConstraintViolation("spike label (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") out of range");
    if (j == 1) return i;
    if (j == m + 1) return k + i;
    if (j <= m) return 2 * k + i * (m - 1) + (j - 2);
    return 2 * k + k * (m - 1) + i * (2 * n - 1) + (j - m - 2);
}

std::array<Vec2, 2> SpikeConfiguration::spike_frame(int a) const {
    const SpikePoint& pt = points.at(a);
    const Frame& fr = frames.at(pt.i);
    if (pt.j <= m + 1) return {fr.R, fr.Rperp};
    return {fr.t, fr.n};
}

SpikeConfiguration build_configuration(int k, int m, int n, double ell,
                                       double ell_bar, double constraint_tol) {
    if (k < 7) throw InvalidParams("configuration needs k >= 7");
    if (m < 1 || n < 1) throw InvalidParams("configuration needs m >= 1, n >= 1");
    if (ell <= 0.0 || ell_bar <= 0.0)
        throw InvalidParams("spacings must be positive");

    double s = std::sin(kPi / k);
    double residual = std::abs(2.0 * s * m * ell - (2.0 * n - 1.0) * ell_bar);
    if (residual > constraint_tol * std::max(1.0, ell))
        throw ConstraintViolation(
            "ring-closure constraint violated: |2 sin(pi/k) m ell - (2n-1) "
            "ell_bar| = " +
            std::to_string(residual));

    SpikeConfiguration cfg;
    cfg.k = k;
    cfg.m = m;
    cfg.n = n;
    cfg.ell = ell;
    cfg.ell_bar = ell_bar;
    cfg.constraint_residual = residual;

    double rho_out = n * ell_bar / s;       // radius of the y_{m+1} ring
    double rho_in = rho_out - m * ell;      // radius of the y_1 ring
    if (rho_in <= 0.0)
        throw ConstraintViolation("inner ring radius is not positive");

    cfg.frames.resize(k);
    cfg.points.resize(cfg.spike_count());
    for (int i = 0; i < k; ++i) {
        double th = 2.0 * kPi * i / k;
        double phi = th + kPi / k;
        Frame fr;
        fr.R = {std::cos(th), std::sin(th)};
        fr.Rperp = {std::sin(th), -std::cos(th)};
        fr.t = {-std::sin(phi), std::cos(phi)};
        fr.n = {std::cos(phi), std::sin(phi)};
        cfg.frames[i] = fr;

        for (int j = 1; j <= m + 1; ++j) {
            double rho = rho_in + (j - 1) * ell;
            SpikePoint pt;
            pt.center = {rho * fr.R[0], rho * fr.R[1]};
            pt.sign = 1;
            pt.i = i;
            pt.j = j;
            cfg.points[cfg.index(i, j)] = pt;
        }
        Vec2 vertex{rho_out * fr.R[0], rho_out * fr.R[1]};
        for (int j = m + 2; j <= m + 2 * n; ++j) {
            double d = (j - m - 1) * ell_bar;
            SpikePoint pt;
            pt.center = {vertex[0] + d * fr.t[0], vertex[1] + d * fr.t[1]};
            pt.sign = ((j - m - 1) % 2 == 0) ? 1 : -1;
            pt.i = i;
            pt.j = j;
            cfg.points[cfg.index(i, j)] = pt;
        }
    }

    // Edge closure: rotating a vertex by 2 pi / k must land 2 n ell_bar along
    // the edge tangent. Measures only floating-point noise by construction.
    {
        double th = 2.0 * kPi / k;
        const Vec2 v = cfg.points[cfg.index(0, m + 1)].center;
        Vec2 rot{std::cos(th) * v[0] - std::sin(th) * v[1],
                 std::sin(th) * v[0] + std::cos(th) * v[1]};
        const Frame& fr0 = cfg.frames[0];
        double dx = rot[0] - v[0] - 2.0 * n * ell_bar * fr0.t[0];
        double dy = rot[1] - v[1] - 2.0 * n * ell_bar * fr0.t[1];
        cfg.closure_residual = std::hypot(dx, dy);
    }
    return cfg;
}

BalanceResult solve_balancing(const KernelTable& table, int k, int m, int n,
                              BalanceMode mode) {
    if (k < 7) throw InvalidParams("balance solve needs k >= 7");
    if (m < 1 || n < 1) throw InvalidParams("balance solve needs m >= 1, n >= 1");
    double two_s = 2.0 * std::sin(kPi / k);
    double ratio = (2.0 * n - 1.0) / (m * two_s);  // ell / ell_bar
    if (ratio <= 1.0)
        throw NoRoot("no balance root: ell/ell_bar ratio " +
                     std::to_string(ratio) + " is not above 1");

    BalanceResult out;
    if (mode == BalanceMode::asymptotic) {
        double lg = std::log(two_s);  // negative for k >= 7
        out.ell = ratio * lg / (1.0 - ratio);
        out.ell_bar = out.ell + lg;
        double nan = std::numeric_limits<double>::quiet_NaN();
        out.residual_balance = nan;
        if (out.ell >= table.s_min() && out.ell <= table.s_max() &&
            out.ell_bar >= table.s_min() && out.ell_bar <= table.s_max()) {
            double pe = table.psi_of(out.ell);
            out.residual_balance = std::abs(pe - two_s * table.psi_of(out.ell_bar)) / pe;
        }
        out.residual_constraint =
            std::abs(two_s * m * out.ell - (2.0 * n - 1.0) * out.ell_bar) /
            std::max(1.0, out.ell);
        return out;
    }

    // Numeric mode: with the constraint eliminated (ell = ratio * ell_bar),
    // bisect f(lb) = psi(ratio lb) - 2 sin(pi/k) psi(lb) on the span where
    // both arguments stay tabulated.
    double lo = std::max(table.s_min(), table.s_min() / ratio);
    double hi = std::min(table.s_max(), table.s_max() / ratio);
    if (lo >= hi) throw NoRoot("tabulated range too narrow for the balance solve");
    auto f = [&](double lb) {
        return table.psi_of(ratio * lb) - two_s * table.psi_of(lb);
    };
    const int scan = 400;
    double a = lo, fa = f(a), b = std::numeric_limits<double>::quiet_NaN();
    bool found = false;
    for (int i = 1; i <= scan; ++i) {
        double x = lo + (hi - lo) * i / scan;
        double fx = f(x);
        if ((fa <= 0.0) != (fx <= 0.0)) {
            b = x;
            found = true;
            break;
        }
        a = x;
        fa = fx;
    }
    if (!found) throw NoRoot("no sign change for the balance equation in range");
    for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
        double mid = 0.5 * (a + b);
        if ((f(mid) <= 0.0) == (f(a) <= 0.0))
            a = mid;
        else
            b = mid;
    }
    out.ell_bar = 0.5 * (a + b);
    out.ell = ratio * out.ell_bar;
    double pe = table.psi_of(out.ell);
    out.residual_balance = std::abs(pe - two_s * table.psi_of(out.ell_bar)) / pe;
    out.residual_constraint =
        std::abs(two_s * m * out.ell - (2.0 * n - 1.0) * out.ell_bar) /
        std::max(1.0, out.ell);
    return out;
}

std::vector<MnCandidate> suggest_mn(int k, double ell_target, int max_results) {
    if (k < 7) throw InvalidParams("candidate search needs k >= 7");
    if (ell_target <= 0.0) throw InvalidParams("target spacing must be positive");
    if (max_results < 1) throw InvalidParams("max_results must be positive");

    double two_s = 2.0 * std::sin(kPi / k);
    double lg = std::log(two_s);
    std::vector<MnCandidate> all;
    for (int m = 1; m <= 300; ++m) {
        for (int n = 1; n <= 300; ++n) {
            double ratio = (2.0 * n - 1.0) / (m * two_s);
            if (ratio <= 1.0 + 1e-12) continue;
            double ell = ratio * lg / (1.0 - ratio);
            if (std::abs(ell - ell_target) <= 0.1 * ell_target)
                all.push_back({m, n, ell});
        }
    }
    if (all.empty())
        throw EmptyResult("no (m, n) pair predicts a spacing within 10% of " +
                          std::to_string(ell_target));
    std::sort(all.begin(), all.end(), [&](const MnCandidate& x, const MnCandidate& y) {
        double dx = std::abs(x.ell_predicted - ell_target);
        double dy = std::abs(y.ell_predicted - ell_target);
        if (dx != dy) return dx < dy;
        if (x.m != y.m) return x.m < y.m;
        return x.n < y.n;
    });
    if (static_cast<int>(all.size()) > max_results) all.resize(max_results);
    return all;
}

}  // namespace spikes
