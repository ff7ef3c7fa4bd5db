#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "spike_spectra/kernels.hpp"

namespace spikes {

// k-fold symmetric spike configuration in the (x1, x2) plane: an inner k-gon
// of vertices y_1, segment points spaced ell along each ray up to y_{m+1},
// and 2n-1 points spaced ell_bar along each outer edge with alternating signs.

struct ConstraintViolation : std::runtime_error {
    explicit ConstraintViolation(const std::string& what) : std::runtime_error(what) {}
};
struct NoRoot : std::runtime_error {
    explicit NoRoot(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyResult : std::runtime_error {
    explicit EmptyResult(const std::string& what) : std::runtime_error(what) {}
};

using Vec2 = std::array<double, 2>;

struct SpikePoint {
    Vec2 center{0.0, 0.0};
    int sign = 1;   // +1 inner/segment, alternating on outer edges
    int i = 0;      // ray index 0..k-1
    int j = 1;      // position label 1..m+2n
};

struct Frame {
    Vec2 R{1.0, 0.0};      // (cos th_i, sin th_i)
    Vec2 Rperp{0.0, -1.0}; // (sin th_i, -cos th_i)
    Vec2 t{0.0, 1.0};      // (-sin(th_i+pi/k), cos(th_i+pi/k))
    Vec2 n{1.0, 0.0};      // (cos(th_i+pi/k), sin(th_i+pi/k))
};

struct SpikeConfiguration {
    int k = 0, m = 0, n = 0;
    double ell = 0.0, ell_bar = 0.0;
    std::vector<SpikePoint> points;  // canonical order, size k*(m+2n)
    std::vector<Frame> frames;       // per ray i
    double constraint_residual = 0.0;  // |2 sin(pi/k) m ell - (2n-1) ell_bar|
    double closure_residual = 0.0;     // |R_k y_{m+1} - y_{m+1} - 2n ell_bar t|

    int spike_count() const { return k * (m + 2 * n); }
    // canonical flat index: [y1 ring; y_{m+1} ring; Y1 per i; Y2 per i]
    int index(int i, int j) const;
    // local frame of spike a: rows (u1, u2); rays use (R, Rperp), outer (t, n)
    std::array<Vec2, 2> spike_frame(int a) const;
};

SpikeConfiguration build_configuration(int k, int m, int n, double ell,
                                       double ell_bar,
                                       double constraint_tol = 1e-8);

enum class BalanceMode { numeric, asymptotic };

struct BalanceResult {
    double ell = 0.0;
    double ell_bar = 0.0;
    double residual_balance = 0.0;    // |psi(ell) - 2 sin(pi/k) psi(ell_bar)| / psi(ell)
    double residual_constraint = 0.0; // relative linear-constraint residual
};

// Solve  psi(ell) = 2 sin(pi/k) psi(ell_bar)  and  2 sin(pi/k) m ell = (2n-1) ell_bar.
// Numeric mode: bisection on ell_bar with ell eliminated via the constraint.
// Asymptotic mode: closes with ell_bar = ell + ln(2 sin(pi/k)) instead and
// reports the first equation's mismatch.
BalanceResult solve_balancing(const KernelTable& table, int k, int m, int n,
                              BalanceMode mode = BalanceMode::numeric);

struct MnCandidate {
    int m = 0, n = 0;
    double ell_predicted = 0.0;
};

// Integer pairs (m, n) whose balance root has ell near ell_target (within
// 10%), ranked by |ell_predicted - ell_target|.
std::vector<MnCandidate> suggest_mn(int k, double ell_target,
                                    int max_results = 20);

}  // namespace spikes
