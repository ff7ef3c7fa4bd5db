#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "spike_spectra/ground_state.hpp"

namespace spikes {

// Interaction kernels between two well-separated copies of the ground state:
//   psi(s)  = -Int w(x - s e) div(w^p(x) e) dx
//   psi1(s) = -Int p w^{p-1} (e.grad w)(x) (e.grad w)(x - s e) dx
//   psi2(s) = +Int p w^{p-1} (ep.grad w)(x) (ep.grad w)(x - s e) dx
// All three are positive and decay like e^{-s} times powers of s.

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};
struct OutOfRange : std::runtime_error {
    explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureOptions {
    int nodes = 24;        // Gauss-Legendre nodes per panel (fine pass)
    int nodes_coarse = 16; // coarse pass for the error estimate
    double panel = 1.0;    // panel width
    double extent = 40.0;  // transverse / axial half-extent (profile r_max)
    double quad_tol = 1e-9;
    bool check_error = true;
};

struct KernelValues {
    double psi = 0.0;
    double psi1 = 0.0;
    double psi2 = 0.0;
};

// Reduced (t, rho) quadrature; independent of the direction e by axisymmetry.
// Computes all three kernels in one pass. Requires dim >= 2.
KernelValues kernels_at(const RadialProfile& profile, double s,
                        const QuadratureOptions& quad = QuadratureOptions());

// psi with an explicit direction argument. For dim == 2 this evaluates the
// planar integral on a fixed axis-aligned grid, so rotating e moves the
// integrand across the grid and the spread across rotations measures true
// quadrature error. For dim >= 3 the reduced path is used.
double psi(const RadialProfile& profile, double s, const std::array<double, 2>& e,
           const QuadratureOptions& quad = QuadratureOptions());

double psi1(const RadialProfile& profile, double s,
            const QuadratureOptions& quad = QuadratureOptions());
double psi2(const RadialProfile& profile, double s,
            const QuadratureOptions& quad = QuadratureOptions());

// Raw pair integral  Int p w^{p-1}(x) (a.grad w)(x) (b.grad w)(x - l e) dx
// for unit vectors a, b in the span of e and its in-plane perpendicular.
// Full-dimensional quadrature (planar for dim 2, cylindrical with an exact
// 16-point angular rule for dim 3). Decomposes as
//   -(a.e)(b.e) psi1(l) + (a.ep)(b.ep) psi2(l).
double interaction_projection(const RadialProfile& profile,
                              const std::array<double, 2>& a,
                              const std::array<double, 2>& b, double ell,
                              const std::array<double, 2>& e,
                              const QuadratureOptions& quad = QuadratureOptions());

// Tabulated kernels on a log-spaced s grid with cubic Hermite interpolation
// of log-values (all kernels positive on the tabulated range).
class KernelTable {
  public:
    KernelTable() = default;
    KernelTable(std::vector<double> s, std::vector<double> psi,
                std::vector<double> psi1, std::vector<double> psi2,
                double quad_tol, int dim, double exponent);

    double psi_of(double s) const { return eval(0, s); }
    double psi1_of(double s) const { return eval(1, s); }
    double psi2_of(double s) const { return eval(2, s); }

    double s_min() const { return s_.front(); }
    double s_max() const { return s_.back(); }
    const std::vector<double>& grid() const { return s_; }
    const std::vector<double>& column(int which) const { return vals_[which]; }
    double quad_tol() const { return quad_tol_; }
    int dim() const { return dim_; }
    double exponent() const { return exponent_; }

  private:
    double eval(int which, double s) const;

    std::vector<double> s_;       // log-spaced nodes
    std::vector<double> u_;       // ln s
    std::array<std::vector<double>, 3> vals_;  // psi, psi1, psi2
    std::array<std::vector<double>, 3> logv_;  // ln of the above
    std::array<std::vector<double>, 3> dlog_;  // d(ln f)/du by centered FD
    double quad_tol_ = 1e-9;
    int dim_ = 0;
    double exponent_ = 0.0;
};

KernelTable build_kernel_table(const RadialProfile& profile, double s_min,
                               double s_max, int count = 129,
                               const QuadratureOptions& quad = QuadratureOptions());

// Ratio constants at a configuration scale pair (ell, ell_bar):
//   delta2 = 2 sin(pi/k) psi2(ell_bar)/psi2(ell)
//   sigma1 = ell psi2(ell)/psi1(ell)
//   sigma2 = ell psi2(ell_bar)/psi1(ell_bar)
//   sigma3 = 2 sin(pi/k) psi1(ell_bar)/psi1(ell)
struct SigmaConstants {
    double delta2 = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma3 = 0.0;
    double ell = 0.0;
    double ell_bar = 0.0;
    int k = 0;
    // raw kernel values backing the ratios (also the matrix scales)
    double psi1_ell = 0.0, psi2_ell = 0.0;
    double psi1_bar = 0.0, psi2_bar = 0.0;
    // finite-difference check of sigma3 against (d ell_bar / d ell)^{-1}
    // along the balance curve psi(ell) = 2 sin(pi/k) psi(ell_bar)
    double fd_sigma3 = 0.0;
    double fd_sigma3_rel_diff = 0.0;

    double d1() const { return sigma1 / ell; }
    double d2() const { return sigma2 / ell; }
};

SigmaConstants sigma_constants(const KernelTable& table, double ell,
                               double ell_bar, int k);

}  // namespace spikes
