#include "understory/sparse.hpp"

#include <cmath>

#include "understory/errors.hpp"

namespace understory::fusion {

AtomDictionary dct_dictionary(int patch_size, int atoms_per_dim) {
    if (patch_size < 1) throw ConfigError("dct_dictionary: patch_size must be >= 1");
    if (atoms_per_dim < patch_size)
        throw ConfigError("dct_dictionary: atoms_per_dim must be >= patch_size (overcomplete)");

    // 1D bank: cosine atoms, mean-removed for k >= 1, unit-normalized.
    Eigen::MatrixXd bank(patch_size, atoms_per_dim);
    for (int k = 0; k < atoms_per_dim; ++k) {
        for (int n = 0; n < patch_size; ++n)
            bank(n, k) = std::cos(M_PI * n * k / atoms_per_dim);
        if (k >= 1) bank.col(k).array() -= bank.col(k).mean();
        const double norm = bank.col(k).norm();
        if (norm > 0.0) bank.col(k) /= norm;
    }

    const int d = patch_size * patch_size;
    const int m = atoms_per_dim * atoms_per_dim;
    AtomDictionary dict;
    dict.atoms.resize(d, m);
    for (int p = 0; p < atoms_per_dim; ++p)
        for (int q = 0; q < atoms_per_dim; ++q) {
            const int col = p * atoms_per_dim + q;
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    dict.atoms(y * patch_size + x, col) = bank(y, p) * bank(x, q);
        }
    return dict;
}

SparseCode omp(const Eigen::VectorXd& signal, const AtomDictionary& dict, int max_atoms,
               double tol) {
    if (signal.size() != dict.signal_dim())
        throw ConfigError("omp: signal dimension does not match the dictionary");
    if (max_atoms < 0) throw ConfigError("omp: max_atoms must be >= 0");
    const int m = dict.atom_count();
    const int budget = std::min(max_atoms, std::min(m, dict.signal_dim()));

    SparseCode code;
    Eigen::VectorXd residual = signal;
    code.residual_norm = residual.norm();
    if (code.residual_norm <= tol || budget == 0) return code;

    std::vector<bool> used(m, false);
    Eigen::MatrixXd selected(dict.signal_dim(), budget);
    Eigen::VectorXd solution;
    while (static_cast<int>(code.support.size()) < budget) {
        const Eigen::VectorXd correlations = dict.atoms.transpose() * residual;
        int best = -1;
        double best_abs = 1e-15; // below this the residual is orthogonal to the bank
        for (int j = 0; j < m; ++j) {
            if (used[j]) continue;
            const double a = std::abs(correlations[j]);
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best < 0) break;
        used[best] = true;
        const int k = static_cast<int>(code.support.size());
        selected.col(k) = dict.atoms.col(best);
        code.support.push_back(best);

        solution = selected.leftCols(k + 1).colPivHouseholderQr().solve(signal);
        residual = signal - selected.leftCols(k + 1) * solution;
        code.residual_norm = residual.norm();
        if (code.residual_norm <= tol) break;
    }

    if (!code.support.empty())
        code.coefficients.assign(solution.data(), solution.data() + code.support.size());
    return code;
}

} // namespace understory::fusion
