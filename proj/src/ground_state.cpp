#include "spike_spectra/ground_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace spikes {

namespace {

// |w|^{p-1} w, the odd extension of w^p (the shooting legs may cross zero).
inline double power_term(double w, double p) {
    return std::copysign(std::pow(std::abs(w), p), w);
}

struct Rhs {
    int dim;
    double p;
    // y = (w, w'); y' = (w', w - |w|^{p-1}w - (N-1)/r w')
    inline std::array<double, 2> operator()(double r, const std::array<double, 2>& y) const {
        double drift = (dim > 1) ? (dim - 1) / r * y[1] : 0.0;
        return {y[1], y[0] - power_term(y[0], p) - drift};
    }
};

// Series start at small h: w = w0 + a2 h^2 + a4 h^4 (regularizes the
// (N-1)/r term at the origin).
struct SeriesStart {
    double a2, a4;
    SeriesStart(int dim, double p, double w0) {
        a2 = (w0 - power_term(w0, p)) / (2.0 * dim);
        a4 = (1.0 - p * std::pow(std::abs(w0), p - 1.0)) * a2 / (4.0 * (dim + 2.0));
    }
    double w(double h) const { return ((a4 * h * h) + a2) * h * h; }
    double wp(double h) const { return (4.0 * a4 * h * h + 2.0 * a2) * h; }
};

inline void rk4_step(const Rhs& f, double r, double h, std::array<double, 2>& y) {
    auto k1 = f(r, y);
    auto k2 = f(r + h / 2, {y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
    auto k3 = f(r + h / 2, {y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
    auto k4 = f(r + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    y[0] += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    y[1] += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
}

// Dormand-Prince 5th-order step (fixed step size; FSAL stage unused).
inline void dopri5_step(const Rhs& f, double r, double h, std::array<double, 2>& y) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    auto k1 = f(r, y);
    auto k2 = f(r + h / 5, {y[0] + h * a21 * k1[0], y[1] + h * a21 * k1[1]});
    auto k3 = f(r + 3 * h / 10, {y[0] + h * (a31 * k1[0] + a32 * k2[0]),
                                 y[1] + h * (a31 * k1[1] + a32 * k2[1])});
    auto k4 = f(r + 4 * h / 5, {y[0] + h * (a41 * k1[0] + a42 * k2[0] + a43 * k3[0]),
                                y[1] + h * (a41 * k1[1] + a42 * k2[1] + a43 * k3[1])});
    auto k5 =
        f(r + 8 * h / 9, {y[0] + h * (a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0]),
                          y[1] + h * (a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1])});
    auto k6 = f(r + h, {y[0] + h * (a61 * k1[0] + a62 * k2[0] + a63 * k3[0] + a64 * k4[0] +
                                    a65 * k5[0]),
                        y[1] + h * (a61 * k1[1] + a62 * k2[1] + a63 * k3[1] + a64 * k4[1] +
                                    a65 * k5[1])});
    y[0] += h * (b1 * k1[0] + b3 * k3[0] + b4 * k4[0] + b5 * k5[0] + b6 * k6[0]);
    y[1] += h * (b1 * k1[1] + b3 * k3[1] + b4 * k4[1] + b5 * k5[1] + b6 * k6[1]);
}

// Shooting classifier on the bisection stage: +1 the solution crossed zero
// (w(0) too high), -1 it turned upward while positive (too low).
int classify(int dim, double p, double w0, const SolverOptions& opts) {
    Rhs f{dim, p};
    SeriesStart s(dim, p, w0);
    double h = opts.rk_step;
    std::array<double, 2> y{w0 + s.w(h), s.wp(h)};
    long nsteps = std::lround((opts.r_max - h) / h);
    for (long i = 0; i < nsteps; ++i) {
        double r = h + static_cast<double>(i) * h;
        rk4_step(f, r, h, y);
        if (y[0] <= 0.0) return +1;
        if (y[1] > 0.0) return -1;
    }
    return -1;
}

struct LegEnd {
    double w, wp;
};

LegEnd shoot_outward(int dim, double p, double w0, const SolverOptions& opts) {
    Rhs f{dim, p};
    SeriesStart s(dim, p, w0);
    double h = opts.fill_step;
    std::array<double, 2> y{w0 + s.w(h), s.wp(h)};
    long nsteps = std::lround((opts.match_radius - h) / h);
    for (long i = 0; i < nsteps; ++i) {
        double r = h + static_cast<double>(i) * h;
        dopri5_step(f, r, h, y);
    }
    return {y[0], y[1]};
}

LegEnd shoot_inward(int dim, double p, double amp, const SolverOptions& opts) {
    Rhs f{dim, p};
    double h = -opts.fill_step;
    std::array<double, 2> y{amp * far_field(dim, opts.r_max),
                            amp * far_field_deriv(dim, opts.r_max)};
    long nsteps = std::lround((opts.r_max - opts.match_radius) / opts.fill_step);
    for (long i = 0; i < nsteps; ++i) {
        double r = opts.r_max + static_cast<double>(i) * h;
        dopri5_step(f, r, h, y);
    }
    return {y[0], y[1]};
}

}  // namespace

// Scaled modified Bessel function: S_nu(x) = K_nu(x) e^x sqrt(2x/pi),
// evaluated by the large-argument asymptotic series. Accurate to ~1e-13 for
// x >= 30 and the small orders used here (nu <= dim/2).
static double bessel_k_scaled(double nu, double x) {
    double four_nu2 = 4.0 * nu * nu;
    double sum = 1.0, term = 1.0;
    for (int k = 1; k <= 30; ++k) {
        double factor = (four_nu2 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
        double next = term * factor;
        if (std::abs(next) >= std::abs(term) && k > 2) break;  // asymptotic turnover
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double far_field(int dim, double r) {
    return std::pow(r, -(dim - 1) / 2.0) * std::exp(-r) *
           bessel_k_scaled(dim / 2.0 - 1.0, r);
}

double far_field_deriv(int dim, double r) {
    return -std::pow(r, -(dim - 1) / 2.0) * std::exp(-r) *
           bessel_k_scaled(dim / 2.0, r);
}

double soliton_1d(double p, double r) {
    double amp = std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0));
    double sech = 1.0 / std::cosh((p - 1.0) / 2.0 * r);
    return amp * std::pow(sech, 2.0 / (p - 1.0));
}

RadialProfile solve_ground_state(const ProblemParams& params, const SolverOptions& opts) {
    int dim = params.dim;
    double p = params.exponent;
    if (dim < 1) throw InvalidParams("dim must be >= 1");
    if (p <= 1.0) throw InvalidParams("exponent must exceed 1");
    if (dim >= 3 && p >= (dim + 2.0) / (dim - 2.0))
        throw InvalidParams("supercritical exponent for dim >= 3");

    // Stage 1: bisection on w(0), bracket by doubling from 1.
    double lo = 1.0, hi = 2.0;
    while (classify(dim, p, hi, opts) < 0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NonConvergence("no overshoot bracket below 1e6");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (classify(dim, p, mid, opts) > 0 ? hi : lo) = mid;
    }
    double w0 = 0.5 * (lo + hi);

    // Stage 2: Newton on (w0, amp): match value and slope of the outward and
    // far-field-seeded inward legs at the matching radius.
    double amp = shoot_outward(dim, p, w0, opts).w / far_field(dim, opts.match_radius);
    auto mismatch = [&](double a, double b) -> std::array<double, 2> {
        LegEnd o = shoot_outward(dim, p, a, opts);
        LegEnd i = shoot_inward(dim, p, b, opts);
        return {o.w - i.w, o.wp - i.wp};
    };
    double w_scale = std::abs(shoot_outward(dim, p, w0, opts).w);
    double fbest = std::numeric_limits<double>::max();
    for (int it = 0; it < 25; ++it) {
        auto f = mismatch(w0, amp);
        double fn = std::max(std::abs(f[0]), std::abs(f[1]));
        if (fn < opts.shoot_tol * w_scale) break;
        if (fn >= fbest && it > 6) break;  // stagnation at machine floor
        fbest = fn;
        double dw = 1e-7 * w0, da = 1e-7 * std::abs(amp);
        auto fw = mismatch(w0 + dw, amp);
        auto fa = mismatch(w0, amp + da);
        double j00 = (fw[0] - f[0]) / dw, j01 = (fa[0] - f[0]) / da;
        double j10 = (fw[1] - f[1]) / dw, j11 = (fa[1] - f[1]) / da;
        double det = j00 * j11 - j01 * j10;
        if (det == 0.0) throw NonConvergence("singular Jacobian in two-sided match");
        w0 -= (j11 * f[0] - j01 * f[1]) / det;
        amp -= (-j10 * f[0] + j00 * f[1]) / det;
    }
    {
        auto f = mismatch(w0, amp);
        double fn = std::max(std::abs(f[0]), std::abs(f[1]));
        if (fn > 1e3 * opts.shoot_tol * w_scale)
            throw NonConvergence("two-sided match did not converge");
    }

    // Stage 3: fill the profile grid, outward on [0, match], inward on
    // (match, r_max], writing every (grid_step / fill_step)-th state.
    RadialProfile prof;
    prof.params = params;
    prof.opts = opts;
    long per_node = std::lround(opts.grid_step / opts.fill_step);
    double h = opts.grid_step / static_cast<double>(per_node);  // exact ratio
    prof.step = opts.grid_step;
    long m_total = std::lround(opts.r_max / opts.grid_step);
    long i_match = std::lround(opts.match_radius / opts.grid_step);
    prof.values.assign(m_total + 1, 0.0);
    prof.derivs.assign(m_total + 1, 0.0);

    Rhs f{dim, p};
    {
        SeriesStart s(dim, p, w0);
        prof.values[0] = w0;
        prof.derivs[0] = 0.0;
        std::array<double, 2> y{w0 + s.w(h), s.wp(h)};
        long steps_done = 1;
        for (long node = 1; node <= i_match; ++node) {
            for (; steps_done < node * per_node; ++steps_done) {
                double r = static_cast<double>(steps_done) * h;
                dopri5_step(f, r, h, y);
            }
            prof.values[node] = y[0];
            prof.derivs[node] = y[1];
        }
    }
    {
        std::array<double, 2> y{amp * far_field(dim, opts.r_max),
                                amp * far_field_deriv(dim, opts.r_max)};
        prof.values[m_total] = y[0];
        prof.derivs[m_total] = y[1];
        long steps_done = 0;
        for (long node = m_total - 1; node > i_match; --node) {
            for (; steps_done < (m_total - node) * per_node; ++steps_done) {
                double r = opts.r_max - static_cast<double>(steps_done) * h;
                dopri5_step(f, r, -h, y);
            }
            prof.values[node] = y[0];
            prof.derivs[node] = y[1];
        }
    }

    // Stage 4: least-squares tail amplitude over the final 10% of the grid.
    {
        long i0 = static_cast<long>(std::ceil(0.9 * m_total));
        double num = 0.0, den = 0.0;
        for (long i = i0; i <= m_total; ++i) {
            double r = static_cast<double>(i) * prof.step;
            double g = std::pow(r, -(dim - 1) / 2.0) * std::exp(-r);
            num += prof.values[i] * g;
            den += g * g;
        }
        prof.tail_amp = num / den;
    }
    return prof;
}

namespace {

// Cubic Hermite on cell [r_i, r_{i+1}] from nodal (value, slope).
struct Cell {
    double f0, d0, f1, d1, h, t;
};

inline Cell locate(const RadialProfile& prof, double r) {
    double h = prof.step;
    long m = static_cast<long>(prof.values.size()) - 1;
    long i = static_cast<long>(std::floor(r / h));
    i = std::clamp<long>(i, 0, m - 1);
    double t = (r - static_cast<double>(i) * h) / h;
    return {prof.values[i], prof.derivs[i], prof.values[i + 1], prof.derivs[i + 1], h, t};
}

inline double ode_second(const RadialProfile& prof, double r, double w, double wp) {
    int dim = prof.params.dim;
    double p = prof.params.exponent;
    if (r == 0.0) return (w - power_term(w, p)) / dim;
    return w - power_term(w, p) - (dim - 1) / r * wp;
}

}  // namespace

double eval_w(const RadialProfile& prof, double r) {
    if (r >= prof.r_max())
        return prof.tail_amp * std::pow(r, -(prof.params.dim - 1) / 2.0) * std::exp(-r);
    Cell c = locate(prof, r);
    double t = c.t, u = 1.0 - t;
    double h00 = u * u * (1.0 + 2.0 * t), h10 = u * u * t;
    double h01 = t * t * (3.0 - 2.0 * t), h11 = -t * t * u;
    return h00 * c.f0 + c.h * h10 * c.d0 + h01 * c.f1 + c.h * h11 * c.d1;
}

double eval_w_prime(const RadialProfile& prof, double r) {
    int dim = prof.params.dim;
    if (r >= prof.r_max()) {
        double g = prof.tail_amp * std::pow(r, -(dim - 1) / 2.0) * std::exp(-r);
        return -g * (1.0 + (dim - 1) / (2.0 * r));
    }
    // Hermite on (w', w'') with nodal curvature taken from the ODE.
    double h = prof.step;
    long m = static_cast<long>(prof.values.size()) - 1;
    long i = std::clamp<long>(static_cast<long>(std::floor(r / h)), 0, m - 1);
    double r0 = static_cast<double>(i) * h;
    double t = (r - r0) / h, u = 1.0 - t;
    double s0 = ode_second(prof, r0, prof.values[i], prof.derivs[i]);
    double s1 = ode_second(prof, r0 + h, prof.values[i + 1], prof.derivs[i + 1]);
    double h00 = u * u * (1.0 + 2.0 * t), h10 = u * u * t;
    double h01 = t * t * (3.0 - 2.0 * t), h11 = -t * t * u;
    return h00 * prof.derivs[i] + h * h10 * s0 + h01 * prof.derivs[i + 1] + h * h11 * s1;
}

double eval_w_second(const RadialProfile& prof, double r) {
    return ode_second(prof, r, eval_w(prof, r), eval_w_prime(prof, r));
}

Diagnostics validate_profile(const RadialProfile& prof) {
    Diagnostics d;
    int dim = prof.params.dim;
    double p = prof.params.exponent;
    double h = prof.step;
    long m = static_cast<long>(prof.values.size()) - 1;
    const auto& w = prof.values;

    for (long i = 2; i + 2 <= m; ++i) {
        double r = static_cast<double>(i) * h;
        double wpp = (-w[i - 2] + 16 * w[i - 1] - 30 * w[i] + 16 * w[i + 1] - w[i + 2]) /
                     (12 * h * h);
        double wp = (w[i - 2] - 8 * w[i - 1] + 8 * w[i + 1] - w[i + 2]) / (12 * h);
        double res = wpp + (dim - 1) / r * wp - w[i] + power_term(w[i], p);
        d.max_residual = std::max(d.max_residual, std::abs(res));
    }
    for (long i = 0; i < m; ++i)
        if (w[i + 1] >= w[i]) ++d.monotone_violations;
    for (long i = 0; i <= m; ++i)
        if (w[i] <= 0.0) ++d.positivity_violations;

    double tail = prof.tail_amp * std::pow(prof.r_max(), -(dim - 1) / 2.0) *
                  std::exp(-prof.r_max());
    d.tail_match = std::abs(w[m] - tail) / std::abs(tail);

    long i0 = static_cast<long>(std::ceil(0.9 * m));
    double qmin = std::numeric_limits<double>::max(), qmax = 0.0, qsum = 0.0;
    for (long i = i0; i <= m; ++i) {
        double r = static_cast<double>(i) * h;
        double q = w[i] * std::pow(r, (dim - 1) / 2.0) * std::exp(r);
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
        qsum += q;
    }
    d.tail_drift = (qmax - qmin) / (qsum / static_cast<double>(m - i0 + 1));
    d.deriv_at_zero = std::abs(prof.derivs[0]);
    return d;
}

}  // namespace spikes
