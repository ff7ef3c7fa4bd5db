#include "spike_spectra/structured.hpp"

#include <cmath>

namespace spikes {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::MatrixXd Circulant::dense() const {
    int k = dim();
    Eigen::MatrixXd out(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out(i, j) = first_row[(j - i + k) % k];
    return out;
}

std::vector<std::complex<double>> circulant_eigenvalues(const Circulant& c) {
    int k = c.dim();
    std::vector<std::complex<double>> eta(k);
    for (int s = 0; s < k; ++s) {
        std::complex<double> sum{0.0, 0.0};
        for (int l = 0; l < k; ++l) {
            double arg = 2.0 * kPi * s * l / k;
            sum += c.first_row[l] * std::complex<double>(std::cos(arg), std::sin(arg));
        }
        eta[s] = sum;
    }
    return eta;
}

std::vector<double> circulant_apply(const Circulant& c, const std::vector<double>& v) {
    int k = c.dim();
    if (static_cast<int>(v.size()) != k)
        throw DimensionMismatch("circulant_apply: vector length " +
                                std::to_string(v.size()) + " vs dim " +
                                std::to_string(k));
    std::vector<double> out(k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out[i] += c.first_row[(j - i + k) % k] * v[j];
    return out;
}

Eigen::MatrixXd ToeplitzT::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        out(i, i) = 2.0;
        if (i + 1 < dim) {
            out(i, i + 1) = -1.0;
            out(i + 1, i) = -1.0;
        }
    }
    return out;
}

double toeplitz_inverse_entry(int nbar, int i, int j) {
    if (nbar < 1) throw IndexOutOfRange("toeplitz_inverse_entry: nbar must be >= 1");
    if (i < 1 || i > nbar || j < 1 || j > nbar)
        throw IndexOutOfRange("toeplitz_inverse_entry: indices are 1-based in [1, nbar]");
    return std::min(i, j) - static_cast<double>(i) * j / (nbar + 1.0);
}

BoundaryVectors boundary_vectors(int nbar) {
    if (nbar < 1) throw IndexOutOfRange("boundary_vectors: nbar must be >= 1");
    BoundaryVectors bv;
    bv.up.resize(nbar);
    bv.down.resize(nbar);
    for (int i = 1; i <= nbar; ++i) {
        bv.up[i - 1] = static_cast<double>(nbar + 1 - i) / (nbar + 1.0);
        bv.down[i - 1] = static_cast<double>(i) / (nbar + 1.0);
    }
    return bv;
}

std::vector<double> solve_toeplitz(int nbar, const std::vector<double>& rhs) {
    if (nbar < 1) throw IndexOutOfRange("solve_toeplitz: nbar must be >= 1");
    if (static_cast<int>(rhs.size()) != nbar)
        throw DimensionMismatch("solve_toeplitz: rhs length " +
                                std::to_string(rhs.size()) + " vs nbar " +
                                std::to_string(nbar));
    // Thomas sweep specialized to diagonal 2, off-diagonal -1.
    std::vector<double> c(nbar, 0.0), d(nbar, 0.0);
    c[0] = -0.5;
    d[0] = rhs[0] / 2.0;
    for (int i = 1; i < nbar; ++i) {
        double denom = 2.0 + c[i - 1];
        c[i] = -1.0 / denom;
        d[i] = (rhs[i] + d[i - 1]) / denom;
    }
    std::vector<double> x(nbar, 0.0);
    x[nbar - 1] = d[nbar - 1];
    for (int i = nbar - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

Eigen::MatrixXcd DFTMatrix::dense() const {
    Eigen::MatrixXcd out(dim, dim);
    double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int l = 0; l < dim; ++l)
        for (int s = 0; s < dim; ++s) {
            double arg = 2.0 * kPi * s * l / dim;
            out(l, s) = scale * std::complex<double>(std::cos(arg), std::sin(arg));
        }
    return out;
}

Eigen::MatrixXd BlockCirculant::dense() const {
    if (static_cast<int>(blocks.size()) != q * q)
        throw DimensionMismatch("block circulant holds " +
                                std::to_string(blocks.size()) + " blocks, expected " +
                                std::to_string(q * q));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q * k, q * k);
    for (int u = 0; u < q; ++u)
        for (int v = 0; v < q; ++v) {
            const Circulant& c = block(u, v);
            if (c.dim() != k)
                throw DimensionMismatch("block (" + std::to_string(u) + ", " +
                                        std::to_string(v) + ") has dim " +
                                        std::to_string(c.dim()));
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    out(u * k + a, v * k + b) = c.first_row[(b - a + k) % k];
        }
    return out;
}

std::vector<Eigen::MatrixXcd> block_dft_conjugate(const BlockCirculant& bc) {
    if (static_cast<int>(bc.blocks.size()) != bc.q * bc.q)
        throw DimensionMismatch("block circulant block count mismatch");
    std::vector<Eigen::MatrixXcd> freq(bc.k, Eigen::MatrixXcd::Zero(bc.q, bc.q));
    for (int u = 0; u < bc.q; ++u)
        for (int v = 0; v < bc.q; ++v) {
            auto eta = circulant_eigenvalues(bc.block(u, v));
            for (int s = 0; s < bc.k; ++s) freq[s](u, v) = eta[s];
        }
    return freq;
}

Eigen::MatrixXd block_dft_reassemble(const std::vector<Eigen::MatrixXcd>& freq,
                                     int k, int q) {
    if (static_cast<int>(freq.size()) != k)
        throw DimensionMismatch("expected " + std::to_string(k) +
                                " frequency blocks, got " + std::to_string(freq.size()));
    for (const auto& f : freq)
        if (f.rows() != q || f.cols() != q)
            throw DimensionMismatch("frequency block is not q x q");
    BlockCirculant bc;
    bc.k = k;
    bc.q = q;
    bc.blocks.assign(q * q, Circulant{std::vector<double>(k, 0.0)});
    for (int u = 0; u < q; ++u)
        for (int v = 0; v < q; ++v) {
            auto& row = bc.blocks[u * q + v].first_row;
            for (int l = 0; l < k; ++l) {
                std::complex<double> sum{0.0, 0.0};
                for (int s = 0; s < k; ++s) {
                    double arg = -2.0 * kPi * s * l / k;
                    sum += freq[s](u, v) *
                           std::complex<double>(std::cos(arg), std::sin(arg));
                }
                row[l] = sum.real() / k;
            }
        }
    return bc.dense();
}

BlockCirculant to_block_circulant(const Eigen::MatrixXd& dense, int k, int q,
                                  double tol) {
    if (dense.rows() != q * k || dense.cols() != q * k)
        throw DimensionMismatch("matrix is " + std::to_string(dense.rows()) + "x" +
                                std::to_string(dense.cols()) + ", expected " +
                                std::to_string(q * k) + " square");
    double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
    BlockCirculant bc;
    bc.k = k;
    bc.q = q;
    bc.blocks.assign(q * q, Circulant{std::vector<double>(k, 0.0)});
    for (int u = 0; u < q; ++u)
        for (int v = 0; v < q; ++v) {
            auto& row = bc.blocks[u * q + v].first_row;
            for (int l = 0; l < k; ++l) {
                double avg = 0.0;
                for (int a = 0; a < k; ++a) avg += dense(u * k + a, v * k + (a + l) % k);
                row[l] = avg / k;
            }
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) {
                    double err = std::abs(dense(u * k + a, v * k + b) -
                                          row[(b - a + k) % k]);
                    if (err > tol * scale)
                        throw NotBlockCirculant(
                            "block (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") deviates by " + std::to_string(err) + " at (" +
                            std::to_string(a) + ", " + std::to_string(b) + ")");
                }
        }
    return bc;
}

}  // namespace spikes
