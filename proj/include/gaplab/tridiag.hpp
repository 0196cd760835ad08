// tridiag.hpp - symmetric tridiagonal eigenvalues (implicit-shift QL) and the
// periodic variant with a +-1 corner hop, handled by splitting off the
// rank-one coupling and pinning each eigenvalue inside the interlacing
// bracket with inertia bisection. Dependency-free, O(q^2).
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gaplab {

// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal and
// subdiagonal (off.size() == diag.size()-1), ascending. Implicit-shift QL.
std::vector<double> tridiag_eigenvalues(std::vector<double> diag, std::vector<double> off);

// Number of eigenvalues strictly below sigma for the q x q matrix (q >= 3)
// with diagonal `diag`, unit off-diagonals and corner entries (0,q-1) =
// (q-1,0) = corner. Sturm count via symmetric elimination; the corner fill-in
// stays confined to the last row.
long cyclic_inertia_below(std::span<const double> diag, double corner, double sigma);

// All eigenvalues of the corner-coupled matrix above, ascending. q >= 3.
// Writing u = e_0 +- e_{q-1}, the matrix is T~ + u u^T with T~ tridiagonal,
// so its eigenvalues interlace those of T~; each is then bisected to
// machine precision with the inertia count.
std::vector<double> cyclic_tridiag_eigenvalues(std::span<const double> diag, double corner);

}  // namespace gaplab
