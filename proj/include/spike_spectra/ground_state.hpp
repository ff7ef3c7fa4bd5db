#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spikes {

// Radial ground state of  w'' + ((N-1)/r) w' - w + |w|^{p-1} w = 0,
// w'(0) = 0, w -> 0 at infinity, solved by shooting on w(0).

struct ProblemParams {
    int dim = 2;          // N >= 1
    double exponent = 3;  // p > 1, subcritical for N >= 3
};

struct SolverOptions {
    double r_max = 40.0;
    double grid_step = 2e-3;     // stored profile grid spacing
    double rk_step = 1e-3;       // fixed step for the bisection stage
    double fill_step = 5e-4;     // fixed step for the final integration
    double shoot_tol = 1e-13;    // two-sided match tolerance at r_match
    double match_radius = 4.0;   // matching radius between outward/inward legs
    double residual_tol = 1e-6;  // finite-difference ODE residual bound
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidParams : std::runtime_error {
    explicit InvalidParams(const std::string& what) : std::runtime_error(what) {}
};

struct RadialProfile {
    ProblemParams params;
    SolverOptions opts;
    double step = 0.0;            // grid spacing, grid[i] = i*step
    std::vector<double> values;   // w(r_i)
    std::vector<double> derivs;   // w'(r_i)
    double tail_amp = 0.0;        // c_w: w ~ c_w r^{-(N-1)/2} e^{-r} past r_max

    double r_max() const { return opts.r_max; }
    double w0() const { return values.empty() ? 0.0 : values.front(); }
    std::size_t size() const { return values.size(); }
};

struct Diagnostics {
    double max_residual = 0.0;      // finite-difference ODE residual, interior nodes
    int monotone_violations = 0;    // count of grid cells with w not decreasing
    int positivity_violations = 0;  // count of non-positive w values
    double tail_match = 0.0;        // relative gap between grid and tail at r_max
    double tail_drift = 0.0;        // drift of r^{(N-1)/2} e^r w over the last decade
    double deriv_at_zero = 0.0;     // |w'(0)|
};

RadialProfile solve_ground_state(const ProblemParams& params,
                                 const SolverOptions& opts = SolverOptions());

// Evaluation: quintic Hermite cells on the stored grid for r <= r_max,
// tail formula c_w r^{-(N-1)/2} e^{-r} beyond. Total on r >= 0.
double eval_w(const RadialProfile& profile, double r);
double eval_w_prime(const RadialProfile& profile, double r);
double eval_w_second(const RadialProfile& profile, double r);

Diagnostics validate_profile(const RadialProfile& profile);

// Closed-form 1-D soliton ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}(((p-1)/2) r).
double soliton_1d(double p, double r);

// Scaled far field: g_n(r) = r^{1-N/2} K_{N/2-1}(r) / sqrt(pi/2) and its
// derivative; normalized so g_n ~ r^{-(N-1)/2} e^{-r} (coefficient 1).
double far_field(int dim, double r);
double far_field_deriv(int dim, double r);

}  // namespace spikes
