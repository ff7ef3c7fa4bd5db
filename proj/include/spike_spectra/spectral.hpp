#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spike_spectra/matrices.hpp"
#include "spike_spectra/structured.hpp"

namespace spikes {

struct AmbiguousThreshold : std::runtime_error {
    explicit AmbiguousThreshold(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateFrequency : std::runtime_error {
    explicit DegenerateFrequency(const std::string& what) : std::runtime_error(what) {}
};

struct FrequencyBlock {
    int freq = 0;
    Eigen::MatrixXcd matrix;
    std::complex<double> det{0.0, 0.0};
    std::vector<double> singular_values;  // descending
};

std::vector<FrequencyBlock> frequency_blocks(const BlockCirculant& reduced);

// Closed-form leading determinants of the frequency blocks.
//   H family: det(D_i) = (2 delta2 / n) b(1 - b/a),  a = sin^2(pi/k),
//   b = sin^2(pi i/k); exact zeros at i in {0, 1, k-1}.
double det_Di_closed_form(int i, double delta2, int n, int k);
// Sharper variant carrying the delta2^2 factor; agrees with the numeric
// 2x2 determinant to machine precision on balanced configurations.
double det_Di_exact(int i, double delta2, int n, int k);

//   F family: det(D_fj) = (4 sigma3^4 d2^2 / (d1 n^2)) (1-a) b_j (a-b_j)^2 / a,
//   with d1 = sigma1/ell, d2 = sigma2/ell; exact zeros at j in {1, k-1};
//   j = 0 must be handled by the numeric determinant (b_0 = 0 branch).
double det_Dfj_closed_form(int j, double a_bar, double b_bar_j, double d1,
                           double d2, double sigma3, int n);

struct DetComparison {
    int freq = 0;
    double det_numeric = 0.0;
    double det_closed_form = 0.0;
    double rel_err = 0.0;  // NaN at the exact-zero frequencies
};
std::vector<DetComparison> compare_Di(const BlockCirculant& reduced_H,
                                      const SigmaConstants& sigmas, int n);
std::vector<DetComparison> compare_Dfj(const BlockCirculant& reduced_F,
                                       const SigmaConstants& sigmas, int n);

struct SpectralReport {
    std::string matrix_id;
    int kernel_dim = 0;
    double gap = 0.0;             // smallest singular value above the kernel
    double threshold = 0.0;       // geometric-mean separation level
    double gap_ratio = 0.0;       // singular-value ratio across the kernel gap
    std::vector<double> kernel_residuals;   // |A w|_inf / |w|_inf per candidate
    std::vector<double> principal_angles;   // numeric null space vs candidates
    std::vector<double> smallest_singular;  // a few smallest singular values
    std::vector<DetComparison> dets;        // per-frequency determinant table
};

// SVD-based kernel certification. The kernel size is located by the largest
// consecutive singular-value ratio in the small tail; a ratio below 100
// throws AmbiguousThreshold.
SpectralReport null_space_report(const Eigen::MatrixXd& matrix,
                                 const std::vector<std::vector<double>>& kernel_candidates,
                                 const std::string& id = "matrix",
                                 double required_ratio = 100.0);

struct NondegeneracyReport {
    SpectralReport m1;
    std::vector<SpectralReport> h_alpha;  // N-2 copies (same matrix family)
    int total_kernel_dim = 0;
    int expected_kernel_dim = 0;  // 3N - 3
    bool pass = false;
    double min_gap_residual_ratio = 0.0;
    int dim = 0;
    int k = 0, m = 0, n = 0;
    double ell = 0.0, ell_bar = 0.0;
};

// Assembles both families at the configuration, certifies kernels against
// the symmetry basis, and aggregates. PASS iff every kernel count is exactly
// 3 and every certified gap exceeds the kernel residuals by >= 100x.
NondegeneracyReport nondegeneracy_report(const SpikeConfiguration& config,
                                         const KernelTable& table, int dim,
                                         double required_ratio = 100.0);

// Log-log least-squares fit gap ~ C / ell^tau.
struct GapFit {
    double C = 0.0;
    double tau = 0.0;
};
GapFit fit_gap_exponent(const std::vector<std::pair<double, double>>& ell_gap);

}  // namespace spikes
