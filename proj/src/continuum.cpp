#include "gaplab/continuum.hpp"

#include <algorithm>
#include <cmath>

namespace gaplab {

double entire_cos(double z) {
    if (std::fabs(z) < 1e-4) {
        // cos(sqrt z) = 1 - z/2 + z^2/24 - z^3/720 + ...
        return 1.0 + z * (-0.5 + z * (1.0 / 24.0 + z * (-1.0 / 720.0)));
    }
    if (z > 0.0) return std::cos(std::sqrt(z));
    return std::cosh(std::sqrt(-z));
}

double entire_sinc(double z) {
    if (std::fabs(z) < 1e-4) {
        // sin(sqrt z)/sqrt z = 1 - z/6 + z^2/120 - z^3/5040 + ...
        return 1.0 + z * (-1.0 / 6.0 + z * (1.0 / 120.0 + z * (-1.0 / 5040.0)));
    }
    if (z > 0.0) {
        const double r = std::sqrt(z);
        return std::sin(r) / r;
    }
    const double r = std::sqrt(-z);
    return std::sinh(r) / r;
}

Mat2 free_transfer(double a, double E) {
    if (!(a > 0.0)) throw Error("DegenerateInput", "cell length must be positive");
    const double z = a * a * E;
    const double c = entire_cos(z);
    const double s = entire_sinc(z);
    return {c, a * s, -a * E * s, c};
}

void CellPotential::validate() const {
    if (!(a > 0.0)) throw Error("DegenerateInput", "cell length must be positive");
    if (samples.empty()) throw Error("DegenerateInput", "cell needs at least one sample");
    for (double v : samples)
        if (!std::isfinite(v)) throw Error("DegenerateInput", "cell sample not finite");
}

Mat2 transfer_ode(const CellPotential& phi, double E, double lambda) {
    phi.validate();
    const double h = phi.a / static_cast<double>(phi.samples.size());
    Mat2 b{1.0, 0.0, 0.0, 1.0};
    for (double v : phi.samples) b = free_transfer(h, E - lambda * v) * b;
    return b;
}

Mat2 transfer_concat(const ContinuumWord& w, double E, double lambda) {
    if (w.cells.empty()) throw Error("DegenerateInput", "empty continuum word");
    Mat2 b{1.0, 0.0, 0.0, 1.0};
    for (const CellPotential& cell : w.cells) b = transfer_ode(cell, E, lambda) * b;
    return b;
}

std::vector<Interval> continuum_bands(const ContinuumWord& w, const Interval& E_range,
                                      double lambda, int grid) {
    if (grid < 2) throw Error("DegenerateInput", "grid must have at least two points");
    if (!(E_range.hi > E_range.lo)) throw Error("DegenerateInput", "empty energy range");

    auto inside = [&](double E) {
        return std::fabs(transfer_concat(w, E, lambda).trace()) <= 2.0;
    };
    auto edge = [&](double out, double in) {
        double a = out, b = in;
        while (std::fabs(b - a) > 1e-9) {
            double m = 0.5 * (a + b);
            if (inside(m)) b = m; else a = m;
        }
        return b;
    };

    std::vector<double> xs(static_cast<std::size_t>(grid));
    std::vector<char> in(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        xs[i] = E_range.lo + (E_range.hi - E_range.lo) * i / (grid - 1.0);
        in[i] = inside(xs[i]) ? 1 : 0;
    }

    std::vector<Interval> bands;
    int i = 0;
    while (i < grid) {
        if (!in[i]) { ++i; continue; }
        int j = i;
        while (j + 1 < grid && in[j + 1]) ++j;
        double lo = (i == 0) ? xs.front() : edge(xs[i - 1], xs[i]);
        double hi = (j == grid - 1) ? xs.back() : edge(xs[j + 1], xs[j]);
        bands.push_back({lo, hi});
        i = j + 1;
    }
    return bands;
}

double continuum_sieve_gap(const CellPotential& psi, double a, double E, double lambda_max) {
    psi.validate();
    if (!(a > 0.0)) throw Error("DegenerateInput", "cell length must be positive");
    if (!(lambda_max >= 0.0)) throw Error("DegenerateInput", "lambda_max must be nonnegative");

    const Mat2 b = transfer_ode(psi, E, 1.0);
    const double alpha = b.a, beta = b.b, gamma = b.c, delta = b.d;

    // trace of B(psi)*free(a, E - lambda) in closed form
    auto trace_at = [&](double lam) {
        const double w = E - lam;
        const double z = a * a * w;
        return (alpha + delta) * entire_cos(z) + gamma * a * entire_sinc(z) -
               beta * a * w * entire_sinc(z);
    };

    const int steps = 4096;
    for (int i = 0; i <= steps; ++i) {
        const double lam = lambda_max * i / static_cast<double>(steps);
        if (std::fabs(trace_at(lam)) > 3.0) return lam;
    }
    throw Error("NotFoundWithinBound", "no hyperbolic cell height below lambda_max");
}

double continuum_repeat_gap(double a, int n, double E, double lambda_max) {
    if (!(a > 0.0)) throw Error("DegenerateInput", "cell length must be positive");
    if (n < 1) throw Error("DegenerateInput", "repeat count must be at least 1");

    const double lam = std::min(E + 1.0, lambda_max);
    const double z = static_cast<double>(n) * static_cast<double>(n) * a * a * (E - lam);
    if (std::fabs(2.0 * entire_cos(z)) > 2.0 + tol_hyp) return lam;
    throw Error("NotFoundWithinBound", "constant height below lambda_max stays elliptic");
}

}  // namespace gaplab
