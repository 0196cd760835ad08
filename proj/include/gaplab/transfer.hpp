// transfer.hpp - one-step transfer matrices for the discrete Schrodinger
// operator and their ordered products over words.
#pragma once

#include <span>

#include "gaplab/mat2.hpp"
#include "gaplab/words.hpp"

namespace gaplab {

// [[E - v, -1], [1, 0]]
Mat2 transfer_single(double v, double E);

// Ordered product over the aggregated potential, rightmost factor first:
// T(lambda*v_q) ... T(lambda*v_1). The running product is divided by
// sqrt(det) every 64 factors to hold unimodularity.
Mat2 transfer_word(std::span<const double> v, double E, double lambda = 1.0);
Mat2 transfer_word(const Word& x, double E, double lambda = 1.0);

double discriminant(const Word& x, double E, double lambda = 1.0);

// Product with the entry magnitude factored out, for long words whose
// product would overflow: matrix = m * 2^log2_scale.
struct ScaledMat2 {
    Mat2 m;                // max |entry| kept in [0.5, 2)
    double log2_scale = 0.0;

    double log_abs_trace() const;     // natural log of |trace|, -inf if 0
    double log_spectral_radius() const;  // unimodular input assumed
};

ScaledMat2 scaled_identity();
ScaledMat2 scaled_mul(const ScaledMat2& lhs, const ScaledMat2& rhs);
ScaledMat2 rescale(const Mat2& m);

ScaledMat2 transfer_word_scaled(std::span<const double> v, double E, double lambda = 1.0);

// d/dE of tr transfer_word, via the product rule: each factor's derivative
// is [[1,0],[0,0]], so D'(E) = sum_j (L_{j-1} R_j)_{11} with prefix/suffix
// products L, R. Returned in scaled form (log2 magnitude + sign carrier).
struct ScaledValue {
    double mantissa = 0.0;  // |mantissa| in [0.5, 2) unless value is 0
    double log2_scale = 0.0;

    double value() const;      // may overflow to +-inf
    double log_abs() const;    // -inf for 0
};

ScaledValue discriminant_derivative(std::span<const double> v, double E, double lambda = 1.0);

// strictly increasing sample points, used by sweep plumbing
struct EnergyGrid {
    std::vector<double> points;

    static EnergyGrid uniform(double lo, double hi, long count);
    void validate() const;  // throws Error("DegenerateInput")
};

}  // namespace gaplab
