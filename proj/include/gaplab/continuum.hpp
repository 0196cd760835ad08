#pragma once

#include <vector>

#include "gaplab/mat2.hpp"
#include "gaplab/spectrum.hpp"

namespace gaplab {

// entire functions c(z) = cos(sqrt z), s(z) = sin(sqrt z)/sqrt z, evaluated
// on the real line without complex square roots
double entire_cos(double z);
double entire_sinc(double z);

// propagator of -u'' = E u over a cell of length a
Mat2 free_transfer(double a, double E);

// piecewise-constant potential on [0,a), equal subcells
struct CellPotential {
    double a = 1.0;
    std::vector<double> samples{0.0};

    void validate() const;
};

struct ContinuumWord {
    std::vector<CellPotential> cells;
};

// exact propagator of -u'' + lambda*phi u = E u (phi piecewise constant)
Mat2 transfer_ode(const CellPotential& phi, double E, double lambda);

// rightmost cell acts first
Mat2 transfer_concat(const ContinuumWord& w, double E, double lambda);

// maximal subintervals of E_range where |tr B| <= 2, edges bisected to 1e-9
std::vector<Interval> continuum_bands(const ContinuumWord& w, const Interval& E_range,
                                      double lambda, int grid);

// smallest scanned cell height lambda in [0, lambda_max] making the period
// (lambda on [0,a)) # psi uniformly hyperbolic at E, |trace| > 3
double continuum_sieve_gap(const CellPotential& psi, double a, double E, double lambda_max);

// constant-height analogue: any lambda > E works; returns E+1 clamped
double continuum_repeat_gap(double a, int n, double E, double lambda_max);

}  // namespace gaplab
