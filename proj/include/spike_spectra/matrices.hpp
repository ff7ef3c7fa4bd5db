#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spike_spectra/configuration.hpp"
#include "spike_spectra/kernels.hpp"
#include "spike_spectra/structured.hpp"

namespace spikes {

struct LayoutMismatch : std::runtime_error {
    explicit LayoutMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Assembled leading-order interaction matrix in normalized units.
//   H family (components alpha >= 3): P x P, scale psi2(ell); entry * scale
//   recovers the physical pair integral values.
//   M1 (in-plane components 1, 2): 2P x 2P component-major, scale -psi1(ell).
struct BlockMatrix {
    std::string id;          // "Halpha" or "M1"
    Eigen::MatrixXd dense;
    double scale = 1.0;      // normalization divisor
    int k = 0, m = 0, n = 0;
    int components = 1;      // 1 for H family, 2 for M1
    SigmaConstants sigmas;

    int spikes() const { return k * (m + 2 * n); }
};

// Structural neighbor pairs: ray chains, outer chains, the wrap edge from
// (i, m+2n) to (i+1, m+1), and the inner ring edges between adjacent y_1.
struct Edge {
    int a = 0, b = 0;
    bool outer = false;  // true: ell_bar spacing class; false: ell class
};
std::vector<Edge> neighbor_edges(const SpikeConfiguration& config);

BlockMatrix assemble_H_alpha(const SpikeConfiguration& config,
                             const SigmaConstants& sigmas);
BlockMatrix assemble_M1(const SpikeConfiguration& config,
                        const SigmaConstants& sigmas);

// Reduced systems after eliminating the segment interiors against the
// vertex unknowns (tridiagonal boundary rows; see reduce notes in the
// implementation). Blocks are circulant; order for H: (a_1, a_{m+1});
// for F: (a_{1,1}, a_{m+1,1}, a_{1,2}, a_{m+1,2}).
BlockCirculant reduce_H_alpha(const BlockMatrix& H);
BlockCirculant reduce_M1(const BlockMatrix& M);

// Dense Schur-complement elimination oracle: keep the listed indices,
// eliminate the rest.
Eigen::MatrixXd dense_schur_reduce(const Eigen::MatrixXd& A,
                                   const std::vector<int>& keep);
// Vertex index sets (flat, canonical layout) kept by the reductions.
std::vector<int> vertex_indices_H(const SpikeConfiguration& config);
std::vector<int> vertex_indices_M1(const SpikeConfiguration& config);

// Finite-dimensional shadows of the symmetry modes.
//   w1, w2 (translations in x1, x2) and w3 (in-plane rotation): length 2P,
//   component-major, for M1.
//   w4 (translation in x_alpha), w5/w6 (rotations mixing x_1/x_2 with
//   x_alpha): length P, for each H_alpha.
struct KernelBasis {
    std::vector<double> w1, w2, w3;  // length 2P
    std::vector<double> w4, w5, w6;  // length P
};
KernelBasis build_symmetry_kernels(const SpikeConfiguration& config);

// Direct-quadrature oracle for assembled entries, in physical units
// (assembled entry * scale). Off-diagonal: chi_a chi_b times the pair
// integral; diagonal: minus the signed sum over structural neighbors.
struct SpikeIndex {
    int i = 0;      // ray
    int j = 1;      // position label
    int comp = 1;   // 1, 2 (in-plane) or >= 3 (transverse)
};
double entry_oracle(const SpikeConfiguration& config,
                    const RadialProfile& profile, const SpikeIndex& row,
                    const SpikeIndex& col,
                    const QuadratureOptions& quad = QuadratureOptions());

}  // namespace spikes
