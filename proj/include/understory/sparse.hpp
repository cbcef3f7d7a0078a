#pragma once

#include <Eigen/Dense>

#include <vector>

namespace understory::fusion {

// Column-atom bank, signal_dim x atom_count, every atom unit-norm.
struct AtomDictionary {
    Eigen::MatrixXd atoms;

    int signal_dim() const { return static_cast<int>(atoms.rows()); }
    int atom_count() const { return static_cast<int>(atoms.cols()); }
};

struct SparseCode {
    std::vector<int> support;          // distinct atom indices, selection order
    std::vector<double> coefficients;  // aligned with support
    double residual_norm = 0.0;

    double activity_l1() const {
        double sum = 0.0;
        for (double c : coefficients) sum += c < 0 ? -c : c;
        return sum;
    }
};

// Separable overcomplete DCT atom bank: d = patch_size^2 signals,
// m = atoms_per_dim^2 atoms (atom (p,q) at column p*atoms_per_dim + q,
// patches vectorized row-major). Requires atoms_per_dim >= patch_size.
AtomDictionary dct_dictionary(int patch_size, int atoms_per_dim);

// Orthogonal matching pursuit: greedily select the atom with maximal
// absolute correlation to the residual, re-solve least squares on the
// support, stop at max_atoms or residual <= tol.
SparseCode omp(const Eigen::VectorXd& signal, const AtomDictionary& dict, int max_atoms,
               double tol);

} // namespace understory::fusion
