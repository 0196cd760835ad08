// thin.hpp - assembling periodic words whose spectrum inside a window is
// exponentially thin: gap covers built from the gap engine, the u-maximal
// concatenation c1^u ... cm^u a^(N-mtu), measured spectral decay, the staged
// iteration that drives the measure below e^{-sqrt(period)}, and a box
// counting dimension estimator for the resulting band sets.
#pragma once

#include <vector>

#include "gaplab/gap.hpp"
#include "gaplab/spectrum.hpp"
#include "gaplab/words.hpp"

namespace gaplab {

// A long periodic word kept as a product structure so one transfer
// evaluation costs O(distinct letters + log repeats) instead of O(length):
// the word is group_1^{rep_1} # group_2^{rep_2} # ..., each group itself a
// concatenation of repeated pieces.
struct FactorPiece {
    Word word;
    long repeat = 1;
};

struct FactorGroup {
    std::vector<FactorPiece> pieces;
    long repeat = 1;
};

struct FactoredWord {
    std::vector<FactorGroup> groups;

    long site_count() const;
    long letter_count() const;
    Word flatten() const;
};

// T(word, E) with square-and-multiply over the repeat exponents.
ScaledMat2 factored_transfer(const FactoredWord& w, double E, double lambda);

// One search region for band extraction together with the number of bands
// it must contain (known a priori from spectral counting: a cluster that is
// one band of the previous-stage word holds exactly N sub-bands of the
// refined word, N = period ratio).
struct BandCluster {
    Interval box;
    long expected = 0;
};

// Band set of a factored word, located by sign scans of |D|-2 inside the
// given clusters (refining the grid until the expected count is found) and
// measured via 4/|D'| when the direct edge separation hits double precision.
BandSet clustered_bands(const FactoredWord& w, double lambda,
                        const std::vector<BandCluster>& clusters);

struct CoverMember {
    Word word;                       // lifted to the common period
    long raw_blocks = 1;             // period before lifting, in seed blocks
    std::vector<Interval> covered;   // window segments this member was picked for
};

// Finite family whose spectral gaps jointly cover a window, all members
// lifted to a common block period t.
struct GapCover {
    std::vector<CoverMember> members;
    long t = 1;  // common period in seed blocks
    long m() const { return static_cast<long>(members.size()); }
};

struct CoverOptions {
    int depth_cap = 20;
    // the gap engine is seeded with a^{#lift} so every member shares the raw
    // period lift; 0 picks ~28 sites worth of blocks (1 for long seeds)
    long lift_blocks = 0;
    long member_cap = 256;
};

// March a frontier across K: reuse the gap of an already-found member when
// one contains the frontier, otherwise open a new gap there. Members are
// recorded with the segments they cover; gaps are intersected across the
// coupling grid so the cover is simultaneous in lambda.
GapCover build_gap_cover(const Word& a, const EnergyWindow& K, double eps,
                         const std::vector<double>& couplings, const FamilySpec& family,
                         double grid_step, const CoverOptions& opts = {});

// c1^{#u} # ... # cm^{#u} # a^{#(N-mtu)} with u maximal, m*t*u <= N.
// Throws Error("NTooSmall") when N < m*t.
Word assemble_thin_word(const GapCover& cover, const Word& a, long N);
FactoredWord factored_thin_word(const GapCover& cover, const Word& a, long N);

struct ThinTrace {
    long N = 0;
    long u = 0;
    long word_length = 0;                                  // letters: N * p
    std::vector<std::pair<double, double>> measure_by_lambda;  // (lambda, Leb(K cap spectrum))
    double L_min_estimate = 0.0;
    double c0 = 0.0;  // fitted decay rate, shared across the list
};

// Assemble and measure at each N; fit log(measure) against N by least
// squares (max over the coupling grid, skipping exact zeros). L_min is the
// min over a 64-point K x couplings grid of the max member Lyapunov
// exponent, reported for diagnostics.
std::vector<ThinTrace> decay_experiment(const GapCover& cover, const Word& a,
                                        const EnergyWindow& K, const std::vector<long>& N_list,
                                        const std::vector<double>& couplings);

struct StageState {
    int stage = 0;
    Word x;
    double eps = 0.0;
    double eta = 0.0;
    long p = 0;  // period of x in letters
    EnergyWindow F;
    std::vector<std::pair<double, double>> measure_by_lambda;  // Leb(F cap spectrum(lambda x))
    std::vector<std::pair<double, BandSet>> bands_by_lambda;   // full band decomposition
};

struct StageOptions {
    long letter_cap = 100000;     // StageBudgetExceeded beyond this period
    double eps_fraction = 0.45;   // of min{eps_prev, Leb(F cap spectrum)/4}; must be < 1/2
    double eta_factor = 0.9;      // eta_l = eta_{l-1} * factor
    double grid_step = 0.05;
    CoverOptions cover;
};

// Iterate: shrink the window schedule F_l = [-1/eta_l, 1/eta_l] minus
// eta_l-balls around the exceptional set, pick eps_l below half of
// min{eps_{l-1}, Leb(F_{l-1} cap spectrum)/4}, cover F_l intersect the
// inflated previous spectrum, and grow N by doubling (then refine to the
// smallest N) until Leb(F_l cap spectrum(x_l)) < e^{-sqrt(p_l)}.
// Throws WindowEmpty, StageBudgetExceeded, plus anything the cover throws.
std::vector<StageState> run_stages(const Word& x0, double eps0, int stages,
                                   const FamilySpec& family, const std::vector<double>& couplings,
                                   double eta0, const StageOptions& opts = {});

struct DimensionEstimate {
    double slope = 0.0;
    std::vector<long> counts;  // minimal epsilon-cover counts, one per epsilon
};

// Exact greedy interval covering N(S, eps) for S = bands clipped to the
// window; slope = least squares of log N against log(1/eps).
DimensionEstimate box_dimension_estimate(const BandSet& bands, const EnergyWindow& window,
                                         const std::vector<double>& eps_list);

}  // namespace gaplab
