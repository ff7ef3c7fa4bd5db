#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spikes {

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& what) : std::runtime_error(what) {}
};
struct NotBlockCirculant : std::runtime_error {
    explicit NotBlockCirculant(const std::string& what) : std::runtime_error(what) {}
};

// Circulant matrix, stored by its first row (x_0, ..., x_{k-1}).
struct Circulant {
    std::vector<double> first_row;

    int dim() const { return static_cast<int>(first_row.size()); }
    Eigen::MatrixXd dense() const;
};

// Eigenvalues eta_s = sum_{l=0}^{k-1} x_l exp(2 pi i s l / k), s = 0..k-1.
std::vector<std::complex<double>> circulant_eigenvalues(const Circulant& c);

std::vector<double> circulant_apply(const Circulant& c,
                                    const std::vector<double>& v);

// Symmetric tridiagonal Toeplitz matrix with 2 on the diagonal, -1 off it.
struct ToeplitzT {
    int dim = 1;
    Eigen::MatrixXd dense() const;
};

// Closed-form inverse entry (T_nbar^{-1})_{ij} = min(i,j) - i*j/(nbar+1),
// 1-based indices.
double toeplitz_inverse_entry(int nbar, int i, int j);

// S_up = (nbar/(nbar+1), ..., 1/(nbar+1)) with T S_up = e_1; S_down reversed.
struct BoundaryVectors {
    std::vector<double> up;
    std::vector<double> down;
};
BoundaryVectors boundary_vectors(int nbar);

// Solve T_nbar x = rhs by the Thomas algorithm.
std::vector<double> solve_toeplitz(int nbar, const std::vector<double>& rhs);

// Unitary DFT matrix, columns k^{-1/2} exp(2 pi i s l / k).
struct DFTMatrix {
    int dim = 1;
    Eigen::MatrixXcd dense() const;
};

// q x q grid of k x k circulant blocks (row-major block order).
struct BlockCirculant {
    int k = 0;
    int q = 0;
    std::vector<Circulant> blocks;  // size q*q

    const Circulant& block(int u, int v) const { return blocks[u * q + v]; }
    Eigen::MatrixXd dense() const;
};

// Conjugating each circulant block by the DFT yields, per frequency s, the
// dense q x q matrix D_s with (u, v) entry = s-th eigenvalue of block (u, v).
std::vector<Eigen::MatrixXcd> block_dft_conjugate(const BlockCirculant& bc);

// Inverse of the above: rebuild the real block-circulant matrix.
Eigen::MatrixXd block_dft_reassemble(const std::vector<Eigen::MatrixXcd>& freq,
                                     int k, int q);

// Detect block-circulant structure in a dense matrix (q*k x q*k, blocks of
// size k). Throws NotBlockCirculant if any block deviates beyond tol.
BlockCirculant to_block_circulant(const Eigen::MatrixXd& dense, int k, int q,
                                  double tol = 1e-12);

}  // namespace spikes
