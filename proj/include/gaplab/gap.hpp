// gap.hpp - opening spectral gaps at a target energy by perturbing a word
// inside its block family: direct hyperbolicity, a single-slot affine wiggle
// (the trace is affine in each site value), or a breadth-first search over
// products of two nearby noncommuting elliptic words.
#pragma once

#include <optional>

#include "gaplab/spectrum.hpp"
#include "gaplab/words.hpp"

namespace gaplab {

// Energies where the family's single-letter trace map degenerates: roots of
// the (1,1) entry of the separator-word transfer matrix. Empty for the
// polymer and full-line families.
struct ExceptionalSet {
    std::vector<double> points;  // ascending
};

ExceptionalSet exceptional_set(const FamilySpec& family);

// A single letter whose transfer matrix at energy E is hyperbolic.
// nullopt only when E is within ~1e-8 of the exceptional set.
std::optional<Letter> letter_hyperbolic_search(const FamilySpec& family, double E);

// Smallest |v| with |tr(M T(v,E))| >= 3 and |v| <= bound. The trace is
// M11 (E - v) + M12 - M21. nullopt when |M11| <= 1e-10 or the bound is
// too small to reach |trace| = 3.
std::optional<double> affine_trace_solve(const Mat2& M, double E, double bound);

struct GapCertificate {
    Word word;                      // in the family semigroup, |trace| > 2 + tol_hyp at E
    double energy = 0.0;
    double trace = 0.0;
    double distance_to_input = 0.0;  // < requested eps
};

// Produce a word within eps of x (in the periodic sup metric) whose transfer
// matrix at E is hyperbolic. Requires E at distance > 1e-6 from the
// exceptional set. Throws Error("DepthExhausted") when the search fails.
GapCertificate open_gap(const Word& x, double E, double eps, const FamilySpec& family,
                        int depth_cap = 20);

}  // namespace gaplab
