// spectrum.hpp - band spectra of periodic discrete Schrodinger operators:
// band edges from the periodic/antiperiodic eigenvalue problems, spectral
// measure in a window, Lyapunov exponent, integrated density of states and
// its derivative through the rotation conjugacy.
#pragma once

#include <cstddef>
#include <vector>

#include "gaplab/transfer.hpp"
#include "gaplab/words.hpp"

namespace gaplab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi > lo ? hi - lo : 0.0; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

// finite union of closed intervals, kept sorted and disjoint
class EnergyWindow {
public:
    EnergyWindow() = default;
    explicit EnergyWindow(std::vector<Interval> parts);  // normalizes
    static EnergyWindow single(double lo, double hi);

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    double measure() const;
    bool contains(double x) const;
    Interval bounding() const;  // throws on empty

    EnergyWindow intersect(const Interval& iv) const;
    EnergyWindow intersect(const EnergyWindow& other) const;
    // removes the open balls (c - r, c + r); used to carve out exceptional energies
    EnergyWindow subtract_balls(const std::vector<double>& centers, double radius) const;

private:
    std::vector<Interval> parts_;
};

struct BandSet {
    std::vector<Interval> bands;  // ascending, disjoint interiors
    long q = 0;                   // number of sites in the period

    double total_measure() const;
    EnergyWindow as_window() const;
};

struct BandOptions {
    double thin_width = 1e-9;  // below this, band width is re-derived from D'
    bool refine_thin = true;
    std::size_t workers = 0;   // 0: hardware default (kept for sweep plumbing)
};

// The 2q band edges are the eigenvalues of the q x q periodic (corner +1) and
// antiperiodic (corner -1) restrictions; sorted and paired consecutively.
// q = 1 and q = 2 are closed forms (for q = 2 the wrap hop doubles/cancels
// the off-diagonal). Pairing is validated against the discriminant sign
// pattern, with a dense bisection fallback if it ever disagrees.
BandSet band_edges(const Word& x, double lambda, const BandOptions& opts = {});
BandSet band_edges(std::span<const double> aggregated, double lambda, const BandOptions& opts = {});

bool in_spectrum(const Word& x, double E, double lambda);  // |D(E)| <= 2 + tol_hyp

double measure_in_window(const BandSet& bands, const EnergyWindow& window);

// (1/q) log spectral_radius(T); >= 0, zero exactly on the spectrum
double lyapunov(const Word& x, double E, double lambda);

// Integrated density of states. Inside band j (1-based) the value is
// (j-1)/q + arccos(s_j D(E)/2)/(q pi) with the sign s_j oriented so the
// result is continuous and nondecreasing; constant j/q across gaps.
double ids(const Word& x, double E, double lambda);
double ids_from_bands(const BandSet& bands, std::span<const double> aggregated, double E,
                      double lambda);

// dIDS/dE at energies strictly inside a band, as the average
// (1/(4 pi q)) sum_j ||conjugator(T(shift^j v, E))||_HS^2 over cyclic shifts.
// Throws Error("NotInteriorOfBand") when |D(E)| >= 2 - tol_hyp.
double ids_derivative_conjugacy(const Word& x, double E, double lambda);

}  // namespace gaplab
