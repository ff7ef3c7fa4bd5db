#include "spike_spectra/kernels.hpp"

#include "spike_spectra/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace spikes {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GLRule {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Gauss-Legendre nodes by Newton iteration on P_n.
GLRule make_gl_rule(int n) {
    GLRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[n - 1 - i] = x;
        rule.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gl_rule(n)).first;
    return it->second;
}

// Surface area of the unit sphere S^{dim-2} (the directions orthogonal to e).
double sphere_area(int dim) {
    return 2.0 * std::pow(kPi, (dim - 1) / 2.0) / std::tgamma((dim - 1) / 2.0);
}

struct PanelGrid {
    double lo = 0.0, width = 0.0;
    int count = 0;
    double center(int i) const { return lo + (i + 0.5) * width; }
};

PanelGrid split(double lo, double hi, double panel) {
    PanelGrid g;
    g.lo = lo;
    g.count = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
    g.width = (hi - lo) / g.count;
    return g;
}

// Lower bound for the distance from a 2D axis-aligned panel to a point,
// via the panel center minus the half-diagonal.
inline double dist_lower(double cx, double cy, double px, double py,
                         double half_diag) {
    return std::max(0.0, std::hypot(cx - px, cy - py) - half_diag);
}

struct Accum {
    double psi = 0.0, psi1 = 0.0, psi2 = 0.0;
    double apsi = 0.0, apsi1 = 0.0, apsi2 = 0.0;  // absolute-value companions
};

// Reduced (t, rho) pass at one node count. The integrand never sees rho = 0
// or the axis singularity because Gauss nodes are interior to panels.
Accum reduced_pass(const RadialProfile& prof, double s, int nodes,
                   const QuadratureOptions& quad) {
    int dim = prof.params.dim;
    double p = prof.params.exponent;
    double L = quad.extent;
    double area = sphere_area(dim);
    const GLRule& rule = gl_rule(nodes);
    PanelGrid gt = split(-L, s + L, quad.panel);
    PanelGrid gr = split(0.0, L, quad.panel);
    double half_diag = 0.5 * std::hypot(gt.width, gr.width);

    Accum acc;
    for (int it = 0; it < gt.count; ++it) {
        double tc = gt.center(it);
        for (int ir = 0; ir < gr.count; ++ir) {
            double rc = gr.center(ir);
            double da = dist_lower(tc, rc, 0.0, 0.0, half_diag);
            double db = dist_lower(tc, rc, s, 0.0, half_diag);
            if (da + db > 2.0 * L) continue;  // outside the interaction ellipse
            for (int a = 0; a < nodes; ++a) {
                double t = tc + 0.5 * gt.width * rule.x[a];
                double wt = 0.5 * gt.width * rule.w[a];
                for (int b = 0; b < nodes; ++b) {
                    double rho = rc + 0.5 * gr.width * rule.x[b];
                    double wr = 0.5 * gr.width * rule.w[b];
                    double ra = std::hypot(t, rho);
                    double rb = std::hypot(t - s, rho);
                    double wa = eval_w(prof, ra);
                    double wpa = eval_w_prime(prof, ra);
                    double wb = eval_w(prof, rb);
                    double wpb = eval_w_prime(prof, rb);
                    double common = p * std::pow(wa, p - 1.0) * wpa / ra;
                    double meas = area * std::pow(rho, dim - 2.0) * wt * wr;
                    double v0 = -wb * common * t * meas;
                    double v1 = -common * t * wpb * (t - s) / rb * meas;
                    double v2 = common * wpb / rb * rho * rho / (dim - 1.0) * meas;
                    acc.psi += v0;
                    acc.psi1 += v1;
                    acc.psi2 += v2;
                    acc.apsi += std::abs(v0);
                    acc.apsi1 += std::abs(v1);
                    acc.apsi2 += std::abs(v2);
                }
            }
        }
    }
    return acc;
}

double rel_gap(double fine, double coarse, double abs_mass) {
    double denom = std::max(std::abs(fine), 1e-6 * abs_mass);
    if (denom == 0.0) return 0.0;
    return std::abs(fine - coarse) / denom;
}

}  // namespace

KernelValues kernels_at(const RadialProfile& profile, double s,
                        const QuadratureOptions& quad) {
    if (profile.params.dim < 2)
        throw InvalidParams("interaction kernels need dim >= 2");
    if (s <= 0.0) throw InvalidParams("kernel separation must be positive");
    Accum fine = reduced_pass(profile, s, quad.nodes, quad);
    if (quad.check_error) {
        Accum coarse = reduced_pass(profile, s, quad.nodes_coarse, quad);
        double est = std::max({rel_gap(fine.psi, coarse.psi, fine.apsi),
                               rel_gap(fine.psi1, coarse.psi1, fine.apsi1),
                               rel_gap(fine.psi2, coarse.psi2, fine.apsi2)});
        if (est > quad.quad_tol)
            throw QuadratureFailure("kernel quadrature estimate " +
                                    format_double(est) + " at s=" +
                                    format_double(s));
    }
    return {fine.psi, fine.psi1, fine.psi2};
}

namespace {

// Planar psi pass with an explicit direction: fixed axis-aligned panels, so
// the achieved accuracy genuinely varies as e rotates.
double planar_psi_pass(const RadialProfile& prof, double s,
                       const std::array<double, 2>& e, int nodes,
                       const QuadratureOptions& quad, double* abs_mass) {
    double p = prof.params.exponent;
    double L = quad.extent;
    double B = L + s;
    const GLRule& rule = gl_rule(nodes);
    PanelGrid g = split(-B, B, quad.panel);
    double half_diag = 0.5 * std::hypot(g.width, g.width);
    double cx = s * e[0], cy = s * e[1];

    double total = 0.0, amass = 0.0;
    for (int ix = 0; ix < g.count; ++ix) {
        double pcx = g.center(ix);
        for (int iy = 0; iy < g.count; ++iy) {
            double pcy = g.center(iy);
            double da = dist_lower(pcx, pcy, 0.0, 0.0, half_diag);
            double db = dist_lower(pcx, pcy, cx, cy, half_diag);
            if (da + db > 2.0 * L) continue;
            for (int a = 0; a < nodes; ++a) {
                double x1 = pcx + 0.5 * g.width * rule.x[a];
                double w1 = 0.5 * g.width * rule.w[a];
                for (int b = 0; b < nodes; ++b) {
                    double x2 = pcy + 0.5 * g.width * rule.x[b];
                    double w2 = 0.5 * g.width * rule.w[b];
                    double ra = std::hypot(x1, x2);
                    double rb = std::hypot(x1 - cx, x2 - cy);
                    double wa = eval_w(prof, ra);
                    double wpa = eval_w_prime(prof, ra);
                    double wb = eval_w(prof, rb);
                    double edotx = e[0] * x1 + e[1] * x2;
                    double v = -wb * p * std::pow(wa, p - 1.0) * wpa * edotx / ra *
                               w1 * w2;
                    total += v;
                    amass += std::abs(v);
                }
            }
        }
    }
    if (abs_mass) *abs_mass = amass;
    return total;
}

}  // namespace

double psi(const RadialProfile& profile, double s, const std::array<double, 2>& e,
           const QuadratureOptions& quad) {
    if (profile.params.dim >= 3) return kernels_at(profile, s, quad).psi;
    if (profile.params.dim < 2)
        throw InvalidParams("interaction kernels need dim >= 2");
    double norm = std::hypot(e[0], e[1]);
    if (norm == 0.0) throw InvalidParams("psi direction must be nonzero");
    std::array<double, 2> eu{e[0] / norm, e[1] / norm};
    double amass = 0.0;
    double fine = planar_psi_pass(profile, s, eu, quad.nodes, quad, &amass);
    if (quad.check_error) {
        double coarse = planar_psi_pass(profile, s, eu, quad.nodes_coarse, quad,
                                        nullptr);
        double est = rel_gap(fine, coarse, amass);
        if (est > quad.quad_tol)
            throw QuadratureFailure("planar psi estimate " + format_double(est) +
                                    " at s=" + format_double(s));
    }
    return fine;
}

double psi1(const RadialProfile& profile, double s, const QuadratureOptions& quad) {
    return kernels_at(profile, s, quad).psi1;
}

double psi2(const RadialProfile& profile, double s, const QuadratureOptions& quad) {
    return kernels_at(profile, s, quad).psi2;
}

namespace {

double projection_pass_2d(const RadialProfile& prof, const std::array<double, 2>& a,
                          const std::array<double, 2>& b, double ell,
                          const std::array<double, 2>& e, int nodes,
                          const QuadratureOptions& quad, double* abs_mass) {
    double p = prof.params.exponent;
    double L = quad.extent;
    double B = L + ell;
    const GLRule& rule = gl_rule(nodes);
    PanelGrid g = split(-B, B, quad.panel);
    double half_diag = 0.5 * std::hypot(g.width, g.width);
    double cx = ell * e[0], cy = ell * e[1];

    double total = 0.0, amass = 0.0;
    for (int ix = 0; ix < g.count; ++ix) {
        double pcx = g.center(ix);
        for (int iy = 0; iy < g.count; ++iy) {
            double pcy = g.center(iy);
            double da = dist_lower(pcx, pcy, 0.0, 0.0, half_diag);
            double db = dist_lower(pcx, pcy, cx, cy, half_diag);
            if (da + db > 2.0 * L) continue;
            for (int ia = 0; ia < nodes; ++ia) {
                double x1 = pcx + 0.5 * g.width * rule.x[ia];
                double w1 = 0.5 * g.width * rule.w[ia];
                for (int ib = 0; ib < nodes; ++ib) {
                    double x2 = pcy + 0.5 * g.width * rule.x[ib];
                    double w2 = 0.5 * g.width * rule.w[ib];
                    double ra = std::hypot(x1, x2);
                    double rb = std::hypot(x1 - cx, x2 - cy);
                    double wa = eval_w(prof, ra);
                    double wpa = eval_w_prime(prof, ra);
                    double wpb = eval_w_prime(prof, rb);
                    double adotx = a[0] * x1 + a[1] * x2;
                    double bdotxm = b[0] * (x1 - cx) + b[1] * (x2 - cy);
                    double v = p * std::pow(wa, p - 1.0) * wpa * adotx / ra * wpb *
                               bdotxm / rb * w1 * w2;
                    total += v;
                    amass += std::abs(v);
                }
            }
        }
    }
    if (abs_mass) *abs_mass = amass;
    return total;
}

double projection_pass_3d(const RadialProfile& prof, const std::array<double, 2>& a,
                          const std::array<double, 2>& b, double ell,
                          const std::array<double, 2>& e, int nodes,
                          const QuadratureOptions& quad, double* abs_mass) {
    double p = prof.params.exponent;
    double L = quad.extent;
    const GLRule& rule = gl_rule(nodes);
    PanelGrid gt = split(-L, ell + L, quad.panel);
    PanelGrid gr = split(0.0, L, quad.panel);
    double half_diag = 0.5 * std::hypot(gt.width, gr.width);

    std::array<double, 2> ep{-e[1], e[0]};
    double ae = a[0] * e[0] + a[1] * e[1], aep = a[0] * ep[0] + a[1] * ep[1];
    double be = b[0] * e[0] + b[1] * e[1], bep = b[0] * ep[0] + b[1] * ep[1];

    constexpr int kTheta = 16;  // uniform rule, exact for the degree-2 angulars
    std::array<double, kTheta> ct;
    for (int j = 0; j < kTheta; ++j)
        ct[j] = std::cos(2.0 * kPi * (j + 0.5) / kTheta);
    double wtheta = 2.0 * kPi / kTheta;

    double total = 0.0, amass = 0.0;
    for (int it = 0; it < gt.count; ++it) {
        double tc = gt.center(it);
        for (int ir = 0; ir < gr.count; ++ir) {
            double rc = gr.center(ir);
            double da = dist_lower(tc, rc, 0.0, 0.0, half_diag);
            double db = dist_lower(tc, rc, ell, 0.0, half_diag);
            if (da + db > 2.0 * L) continue;
            for (int ia = 0; ia < nodes; ++ia) {
                double t = tc + 0.5 * gt.width * rule.x[ia];
                double wt = 0.5 * gt.width * rule.w[ia];
                for (int ib = 0; ib < nodes; ++ib) {
                    double rho = rc + 0.5 * gr.width * rule.x[ib];
                    double wr = 0.5 * gr.width * rule.w[ib];
                    double ra = std::hypot(t, rho);
                    double rb = std::hypot(t - ell, rho);
                    double wa = eval_w(prof, ra);
                    double wpa = eval_w_prime(prof, ra);
                    double wpb = eval_w_prime(prof, rb);
                    double base = p * std::pow(wa, p - 1.0) * wpa / ra * wpb / rb *
                                  rho * wt * wr * wtheta;
                    for (int j = 0; j < kTheta; ++j) {
                        double adotx = ae * t + aep * rho * ct[j];
                        double bdotxm = be * (t - ell) + bep * rho * ct[j];
                        double v = base * adotx * bdotxm;
                        total += v;
                        amass += std::abs(v);
                    }
                }
            }
        }
    }
    if (abs_mass) *abs_mass = amass;
    return total;
}

}  // namespace

double interaction_projection(const RadialProfile& profile,
                              const std::array<double, 2>& a,
                              const std::array<double, 2>& b, double ell,
                              const std::array<double, 2>& e,
                              const QuadratureOptions& quad) {
    int dim = profile.params.dim;
    if (dim != 2 && dim != 3)
        throw InvalidParams("interaction_projection supports dim 2 and 3");
    double norm = std::hypot(e[0], e[1]);
    if (norm == 0.0) throw InvalidParams("projection direction must be nonzero");
    std::array<double, 2> eu{e[0] / norm, e[1] / norm};

    auto pass = (dim == 2) ? projection_pass_2d : projection_pass_3d;
    double amass = 0.0;
    double fine = pass(profile, a, b, ell, eu, quad.nodes, quad, &amass);
    if (quad.check_error) {
        double coarse = pass(profile, a, b, ell, eu, quad.nodes_coarse, quad,
                             nullptr);
        double est = rel_gap(fine, coarse, amass);
        if (est > quad.quad_tol)
            throw QuadratureFailure("projection estimate " + format_double(est) +
                                    " at ell=" + format_double(ell));
    }
    return fine;
}

KernelTable::KernelTable(std::vector<double> s, std::vector<double> psi,
                         std::vector<double> psi1, std::vector<double> psi2,
                         double quad_tol, int dim, double exponent)
    : s_(std::move(s)), quad_tol_(quad_tol), dim_(dim), exponent_(exponent) {
    vals_[0] = std::move(psi);
    vals_[1] = std::move(psi1);
    vals_[2] = std::move(psi2);
    std::size_t n = s_.size();
    if (n < 5) throw InvalidParams("kernel table needs at least 5 nodes");
    for (int c = 0; c < 3; ++c)
        if (vals_[c].size() != n)
            throw InvalidParams("kernel table column size mismatch");
    u_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (s_[i] <= 0.0 || (i > 0 && s_[i] <= s_[i - 1]))
            throw InvalidParams("kernel table grid must be positive ascending");
        u_[i] = std::log(s_[i]);
    }
    double h = (u_.back() - u_.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(u_[i] - u_[i - 1] - h) > 1e-8 * h)
            throw InvalidParams("kernel table grid must be log-uniform");
    for (int c = 0; c < 3; ++c) {
        logv_[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (vals_[c][i] <= 0.0)
                throw InvalidParams("kernel table values must be positive");
            logv_[c][i] = std::log(vals_[c][i]);
        }
        const auto& f = logv_[c];
        auto& d = dlog_[c];
        d.resize(n);
        d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
        d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h);
        for (std::size_t i = 2; i + 2 < n; ++i)
            d[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
        d[n - 2] = (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] -
                    f[n - 5]) /
                   (12 * h);
        d[n - 1] = (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] +
                    3 * f[n - 5]) /
                   (12 * h);
    }
}

double KernelTable::eval(int which, double s) const {
    if (s_.empty()) throw OutOfRange("kernel table is empty");
    double pad = 1e-12 * s_.back();
    if (s < s_.front() - pad || s > s_.back() + pad)
        throw OutOfRange("kernel table lookup at s=" + std::to_string(s) +
                         " outside [" + std::to_string(s_.front()) + ", " +
                         std::to_string(s_.back()) + "]");
    std::size_t n = s_.size();
    double h = (u_.back() - u_.front()) / static_cast<double>(n - 1);
    double u = std::log(std::clamp(s, s_.front(), s_.back()));
    auto i = static_cast<std::size_t>(
        std::clamp((u - u_.front()) / h, 0.0, static_cast<double>(n - 2)));
    double u0 = u_.front() + static_cast<double>(i) * h;
    double t = (u - u0) / h, v = 1.0 - t;
    const auto& f = logv_[which];
    const auto& d = dlog_[which];
    double h00 = v * v * (1.0 + 2.0 * t), h10 = v * v * t;
    double h01 = t * t * (3.0 - 2.0 * t), h11 = -t * t * v;
    double g = h00 * f[i] + h * h10 * d[i] + h01 * f[i + 1] + h * h11 * d[i + 1];
    return std::exp(g);
}

KernelTable build_kernel_table(const RadialProfile& profile, double s_min,
                               double s_max, int count,
                               const QuadratureOptions& quad) {
    if (count < 5) throw InvalidParams("kernel table needs at least 5 nodes");
    if (s_min <= 0.0 || s_max <= s_min)
        throw InvalidParams("kernel table range must satisfy 0 < s_min < s_max");
    std::vector<double> s(count), p0(count), p1(count), p2(count);
    double u0 = std::log(s_min), u1 = std::log(s_max);
    for (int i = 0; i < count; ++i) {
        s[i] = std::exp(u0 + (u1 - u0) * i / static_cast<double>(count - 1));
        KernelValues v = kernels_at(profile, s[i], quad);
        p0[i] = v.psi;
        p1[i] = v.psi1;
        p2[i] = v.psi2;
    }
    return KernelTable(std::move(s), std::move(p0), std::move(p1), std::move(p2),
                       quad.quad_tol, profile.params.dim, profile.params.exponent);
}

namespace {

// Solve psi(x) = target on the tabulated range (psi is strictly decreasing).
double invert_psi(const KernelTable& table, double target) {
    double lo = table.s_min(), hi = table.s_max();
    double flo = table.psi_of(lo) - target, fhi = table.psi_of(hi) - target;
    if (flo < 0.0 || fhi > 0.0) return std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        ((table.psi_of(mid) - target) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SigmaConstants sigma_constants(const KernelTable& table, double ell,
                               double ell_bar, int k) {
    if (k < 3) throw InvalidParams("sigma constants need k >= 3");
    SigmaConstants sc;
    sc.ell = ell;
    sc.ell_bar = ell_bar;
    sc.k = k;
    double two_s = 2.0 * std::sin(kPi / k);
    sc.psi1_ell = table.psi1_of(ell);
    sc.psi2_ell = table.psi2_of(ell);
    sc.psi1_bar = table.psi1_of(ell_bar);
    sc.psi2_bar = table.psi2_of(ell_bar);
    sc.delta2 = two_s * sc.psi2_bar / sc.psi2_ell;
    sc.sigma1 = ell * sc.psi2_ell / sc.psi1_ell;
    sc.sigma2 = ell * sc.psi2_bar / sc.psi1_bar;
    sc.sigma3 = two_s * sc.psi1_bar / sc.psi1_ell;

    // Central-difference slope of the balance curve psi(l) = 2 sin(pi/k) psi(lb):
    // sigma3 equals (d lb / d l)^{-1} along it.
    double delta = 1e-3;
    double nan = std::numeric_limits<double>::quiet_NaN();
    sc.fd_sigma3 = nan;
    sc.fd_sigma3_rel_diff = nan;
    if (ell - delta >= table.s_min() && ell + delta <= table.s_max()) {
        double lbp = invert_psi(table, table.psi_of(ell + delta) / two_s);
        double lbm = invert_psi(table, table.psi_of(ell - delta) / two_s);
        if (std::isfinite(lbp) && std::isfinite(lbm) && lbp != lbm) {
            sc.fd_sigma3 = 2.0 * delta / (lbp - lbm);
            sc.fd_sigma3_rel_diff = std::abs(sc.fd_sigma3 - sc.sigma3) /
                                    std::abs(sc.sigma3);
        }
    }
    return sc;
}

}  // namespace spikes
