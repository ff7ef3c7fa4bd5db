#include "spike_spectra/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace spikes {

namespace {
constexpr double kPi = 3.14159265358979323846;

double sin2_reduced(int i, int k) {
    // sin^2(pi i / k) evaluated at the reduced index min(i, k-i), so the
    // i and k-i frequencies share bitwise-identical values and the analytic
    // zeros of the determinant formulas are exact in floating point.
    int r = std::min((i % k + k) % k, k - (i % k + k) % k);
    double s = std::sin(kPi * r / k);
    return s * s;
}
}  // namespace

std::vector<FrequencyBlock> frequency_blocks(const BlockCirculant& reduced) {
    auto freq = block_dft_conjugate(reduced);
    std::vector<FrequencyBlock> out(reduced.k);
    for (int s = 0; s < reduced.k; ++s) {
        out[s].freq = s;
        out[s].matrix = freq[s];
        out[s].det = freq[s].determinant();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(freq[s]);
        const auto& sv = svd.singularValues();
        out[s].singular_values.assign(sv.data(), sv.data() + sv.size());
    }
    return out;
}

double det_Di_closed_form(int i, double delta2, int n, int k) {
    double a = sin2_reduced(1, k);
    double b = sin2_reduced(i, k);
    return (2.0 * delta2 / n) * b * (1.0 - b / a);
}

double det_Di_exact(int i, double delta2, int n, int k) {
    double a = sin2_reduced(1, k);
    double b = sin2_reduced(i, k);
    return (2.0 * delta2 * delta2 / n) * b * (1.0 - b / a);
}

double det_Dfj_closed_form(int j, double a_bar, double b_bar_j, double d1,
                           double d2, double sigma3, int n) {
    if (j == 0)
        throw DegenerateFrequency(
            "frequency 0 has no closed-form determinant; use the numeric block");
    double s3sq = sigma3 * sigma3;
    double diff = a_bar - b_bar_j;
    return (4.0 * s3sq * s3sq * d2 * d2 / (d1 * static_cast<double>(n) * n)) *
           (1.0 - a_bar) * b_bar_j * diff * diff / a_bar;
}

std::vector<DetComparison> compare_Di(const BlockCirculant& reduced_H,
                                      const SigmaConstants& sigmas, int n) {
    auto blocks = frequency_blocks(reduced_H);
    std::vector<DetComparison> out;
    out.reserve(blocks.size());
    for (const auto& fb : blocks) {
        DetComparison row;
        row.freq = fb.freq;
        row.det_numeric = fb.det.real();
        row.det_closed_form = det_Di_closed_form(fb.freq, sigmas.delta2, n,
                                                 reduced_H.k);
        row.rel_err = (row.det_closed_form == 0.0)
                          ? std::numeric_limits<double>::quiet_NaN()
                          : std::abs(row.det_numeric - row.det_closed_form) /
                                std::abs(row.det_closed_form);
        out.push_back(row);
    }
    return out;
}

std::vector<DetComparison> compare_Dfj(const BlockCirculant& reduced_F,
                                       const SigmaConstants& sigmas, int n) {
    auto blocks = frequency_blocks(reduced_F);
    double a_bar = sin2_reduced(1, reduced_F.k);
    std::vector<DetComparison> out;
    out.reserve(blocks.size());
    for (const auto& fb : blocks) {
        DetComparison row;
        row.freq = fb.freq;
        row.det_numeric = fb.det.real();
        if (fb.freq == 0) {
            row.det_closed_form = std::numeric_limits<double>::quiet_NaN();
            row.rel_err = std::numeric_limits<double>::quiet_NaN();
        } else {
            double b_bar = sin2_reduced(fb.freq, reduced_F.k);
            row.det_closed_form = det_Dfj_closed_form(
                fb.freq, a_bar, b_bar, sigmas.d1(), sigmas.d2(), sigmas.sigma3, n);
            row.rel_err = (row.det_closed_form == 0.0)
                              ? std::numeric_limits<double>::quiet_NaN()
                              : std::abs(row.det_numeric - row.det_closed_form) /
                                    std::abs(row.det_closed_form);
        }
        out.push_back(row);
    }
    return out;
}

SpectralReport null_space_report(
    const Eigen::MatrixXd& matrix,
    const std::vector<std::vector<double>>& kernel_candidates,
    const std::string& id, double required_ratio) {
    int D = static_cast<int>(matrix.rows());
    if (matrix.cols() != D)
        throw DimensionMismatch("null space analysis needs a square matrix");
    for (const auto& w : kernel_candidates)
        if (static_cast<int>(w.size()) != D)
            throw DimensionMismatch("kernel candidate length mismatch");

    SpectralReport rep;
    rep.matrix_id = id;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinV);
    Eigen::VectorXd sv = svd.singularValues();  // descending

    // Locate the kernel boundary in the small tail of the spectrum: the
    // widest candidate kernel whose boundary singular-value ratio clears the
    // certification threshold. Scanning from the top keeps near-zero modes
    // of different magnitudes (exact symmetry zeros next to a quadrature-
    // limited one) inside a single kernel.
    int ncand = static_cast<int>(kernel_candidates.size());
    int window = std::min(D - 1, std::max(8, 2 * ncand + 2));
    int best_kdim = 0;
    double best_ratio = 0.0;
    double max_ratio = 0.0;
    for (int kdim = window; kdim >= 1; --kdim) {
        double above = sv(D - kdim - 1);
        double below = sv(D - kdim);
        double ratio = above / std::max(below, 1e-300);
        max_ratio = std::max(max_ratio, ratio);
        if (ratio >= required_ratio) {
            best_ratio = ratio;
            best_kdim = kdim;
            break;
        }
    }
    if (best_kdim == 0)
        throw AmbiguousThreshold(
            id + ": largest singular-value ratio in the tail is " +
            std::to_string(max_ratio) + ", below the required " +
            std::to_string(required_ratio));

    rep.kernel_dim = best_kdim;
    rep.gap = sv(D - best_kdim - 1);
    rep.threshold = std::sqrt(sv(D - best_kdim - 1) *
                              std::max(sv(D - best_kdim), 1e-300));
    rep.gap_ratio = best_ratio;

    int tail = std::min(D, std::max(best_kdim + 3, 6));
    rep.smallest_singular.resize(tail);
    for (int t = 0; t < tail; ++t) rep.smallest_singular[t] = sv(D - 1 - t);
    std::sort(rep.smallest_singular.begin(), rep.smallest_singular.end());

    rep.kernel_residuals.reserve(ncand);
    for (const auto& w : kernel_candidates) {
        Eigen::Map<const Eigen::VectorXd> wv(w.data(), D);
        double winf = wv.cwiseAbs().maxCoeff();
        double rinf = (matrix * wv).cwiseAbs().maxCoeff();
        rep.kernel_residuals.push_back(rinf / std::max(winf, 1e-300));
    }

    if (ncand > 0) {
        Eigen::MatrixXd W(D, ncand);
        for (int c = 0; c < ncand; ++c)
            for (int r = 0; r < D; ++r) W(r, c) = kernel_candidates[c][r];
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(D, ncand);
        Eigen::MatrixXd V = svd.matrixV().rightCols(best_kdim);
        Eigen::BDCSVD<Eigen::MatrixXd> angles(V.transpose() * Q);
        int na = std::min(best_kdim, ncand);
        rep.principal_angles.resize(na);
        for (int t = 0; t < na; ++t) {
            double cosang = std::clamp(angles.singularValues()(t), -1.0, 1.0);
            rep.principal_angles[t] = std::acos(cosang);
        }
        std::sort(rep.principal_angles.begin(), rep.principal_angles.end());
    }
    return rep;
}

NondegeneracyReport nondegeneracy_report(const SpikeConfiguration& config,
                                         const KernelTable& table, int dim,
                                         double required_ratio) {
    if (dim < 2) throw InvalidParams("nondegeneracy analysis needs dim >= 2");
    if (table.dim() != 0 && table.dim() != dim)
        throw LayoutMismatch("kernel table was built for dim " +
                             std::to_string(table.dim()));
    SigmaConstants sigmas =
        sigma_constants(table, config.ell, config.ell_bar, config.k);
    KernelBasis kb = build_symmetry_kernels(config);

    NondegeneracyReport rep;
    rep.dim = dim;
    rep.k = config.k;
    rep.m = config.m;
    rep.n = config.n;
    rep.ell = config.ell;
    rep.ell_bar = config.ell_bar;
    rep.expected_kernel_dim = 3 * dim - 3;

    BlockMatrix M = assemble_M1(config, sigmas);
    rep.m1 = null_space_report(M.dense, {kb.w1, kb.w2, kb.w3}, "M1", required_ratio);
    rep.m1.dets = compare_Dfj(reduce_M1(M), sigmas, config.n);

    bool counts_ok = rep.m1.kernel_dim == 3;
    rep.total_kernel_dim = rep.m1.kernel_dim;
    double min_ratio = rep.m1.gap /
                       std::max(*std::max_element(rep.m1.kernel_residuals.begin(),
                                                  rep.m1.kernel_residuals.end()),
                                1e-300);

    if (dim >= 3) {
        BlockMatrix H = assemble_H_alpha(config, sigmas);
        SpectralReport hrep = null_space_report(H.dense, {kb.w4, kb.w5, kb.w6},
                                                "Halpha", required_ratio);
        hrep.dets = compare_Di(reduce_H_alpha(H), sigmas, config.n);
        double hratio = hrep.gap /
                        std::max(*std::max_element(hrep.kernel_residuals.begin(),
                                                   hrep.kernel_residuals.end()),
                                 1e-300);
        for (int alpha = 3; alpha <= dim; ++alpha) {
            rep.h_alpha.push_back(hrep);
            rep.total_kernel_dim += hrep.kernel_dim;
            counts_ok = counts_ok && hrep.kernel_dim == 3;
            min_ratio = std::min(min_ratio, hratio);
        }
    }

    rep.min_gap_residual_ratio = min_ratio;
    rep.pass = counts_ok && rep.total_kernel_dim == rep.expected_kernel_dim &&
               min_ratio >= required_ratio;
    return rep;
}

GapFit fit_gap_exponent(const std::vector<std::pair<double, double>>& ell_gap) {
    if (ell_gap.size() < 2)
        throw InvalidParams("gap exponent fit needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [ell, gap] : ell_gap) {
        if (ell <= 0.0 || gap <= 0.0)
            throw InvalidParams("gap exponent fit needs positive data");
        double x = std::log(ell), y = std::log(gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double N = static_cast<double>(ell_gap.size());
    double denom = N * sxx - sx * sx;
    if (denom == 0.0) throw InvalidParams("gap exponent fit is degenerate");
    double slope = (N * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / N;
    return {std::exp(intercept), -slope};
}

}  // namespace spikes
