#include "gaplab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gaplab/tridiag.hpp"

namespace gaplab {

namespace {

constexpr double kPolishTrigger = 1e-8;   // |D(edge) -+ 2| above this gets a Newton touch-up
constexpr double kValidateWidth = 1e-7;   // only bands/gaps this wide are sign-checked
constexpr double kValidateTol = 1e-6;

// D(E) with overflow clamped to +-1e300; sign always meaningful
double disc_clamped(std::span<const double> agg, double E, double lambda) {
    const ScaledMat2 p = transfer_word_scaled(agg, E, lambda);
    const double t = p.m.trace();
    if (t == 0.0) return 0.0;
    const double lt = p.log_abs_trace();
    if (lt > 690.0) return t > 0.0 ? 1e300 : -1e300;
    return t * std::exp2(p.log2_scale);
}

struct TaggedEdge {
    double e;
    double target;  // discriminant value this edge solves for: +2 or -2
};

}  // namespace

EnergyWindow::EnergyWindow(std::vector<Interval> parts) : parts_(std::move(parts)) {
    std::erase_if(parts_, [](const Interval& iv) { return iv.hi < iv.lo; });
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> merged;
    for (const Interval& iv : parts_) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    parts_ = std::move(merged);
}

EnergyWindow EnergyWindow::single(double lo, double hi) {
    if (hi < lo) throw Error("DegenerateInput", "EnergyWindow: hi < lo");
    return EnergyWindow(std::vector<Interval>{{lo, hi}});
}

double EnergyWindow::measure() const {
    double m = 0.0;
    for (const Interval& iv : parts_) m += iv.length();
    return m;
}

bool EnergyWindow::contains(double x) const {
    for (const Interval& iv : parts_)
        if (iv.contains(x)) return true;
    return false;
}

Interval EnergyWindow::bounding() const {
    if (parts_.empty()) throw Error("DegenerateInput", "EnergyWindow: empty window has no bounds");
    return {parts_.front().lo, parts_.back().hi};
}

EnergyWindow EnergyWindow::intersect(const Interval& iv) const {
    std::vector<Interval> out;
    for (const Interval& p : parts_) {
        const double lo = std::max(p.lo, iv.lo);
        const double hi = std::min(p.hi, iv.hi);
        if (hi >= lo) out.push_back({lo, hi});
    }
    return EnergyWindow(std::move(out));
}

EnergyWindow EnergyWindow::intersect(const EnergyWindow& other) const {
    std::vector<Interval> out;
    for (const Interval& p : other.parts_) {
        EnergyWindow piece = intersect(p);
        out.insert(out.end(), piece.parts_.begin(), piece.parts_.end());
    }
    return EnergyWindow(std::move(out));
}

EnergyWindow EnergyWindow::subtract_balls(const std::vector<double>& centers, double radius) const {
    std::vector<Interval> cur = parts_;
    for (double c : centers) {
        std::vector<Interval> next;
        for (const Interval& iv : cur) {
            // remove the open ball (c-radius, c+radius); endpoints stay
            const double bl = c - radius, bh = c + radius;
            if (bh <= iv.lo || bl >= iv.hi) {
                next.push_back(iv);
                continue;
            }
            if (iv.lo <= bl) next.push_back({iv.lo, bl});
            if (bh <= iv.hi) next.push_back({bh, iv.hi});
        }
        cur = std::move(next);
    }
    return EnergyWindow(std::move(cur));
}

double BandSet::total_measure() const {
    double m = 0.0;
    for (const Interval& b : bands) m += b.length();
    return m;
}

EnergyWindow BandSet::as_window() const { return EnergyWindow(bands); }

namespace {

std::vector<TaggedEdge> eigen_edges(std::span<const double> a) {
    const long q = static_cast<long>(a.size());
    std::vector<double> per, anti;
    if (q == 1) {
        per = {a[0] + 2.0};
        anti = {a[0] - 2.0};
    } else if (q == 2) {
        // wrap hop doubles the off-diagonal for the periodic matrix and
        // cancels it for the antiperiodic one
        const double mean = 0.5 * (a[0] + a[1]);
        const double half = 0.5 * (a[0] - a[1]);
        const double r = std::sqrt(half * half + 4.0);
        per = {mean - r, mean + r};
        anti = {std::min(a[0], a[1]), std::max(a[0], a[1])};
    } else {
        std::vector<double> av(a.begin(), a.end());
        per = cyclic_tridiag_eigenvalues(av, 1.0);
        anti = cyclic_tridiag_eigenvalues(av, -1.0);
    }
    std::vector<TaggedEdge> edges;
    edges.reserve(2 * static_cast<std::size_t>(q));
    for (double e : per) edges.push_back({e, 2.0});
    for (double e : anti) edges.push_back({e, -2.0});
    std::sort(edges.begin(), edges.end(),
              [](const TaggedEdge& x, const TaggedEdge& y) { return x.e < y.e; });
    return edges;
}

void polish_edge(std::span<const double> agg, double lambda, TaggedEdge& edge) {
    double E = edge.e;
    double r = std::fabs(disc_clamped(agg, E, lambda) - edge.target);
    if (r <= kPolishTrigger) return;
    for (int it = 0; it < 3; ++it) {
        const ScaledValue dp = discriminant_derivative(agg, E, lambda);
        const double dpv = dp.value();
        if (dpv == 0.0 || !std::isfinite(dpv)) return;
        const double d = disc_clamped(agg, E, lambda);
        double step = (d - edge.target) / dpv;
        if (!std::isfinite(step)) return;
        step = std::clamp(step, -1e-6, 1e-6);
        const double Enew = E - step;
        const double rnew = std::fabs(disc_clamped(agg, Enew, lambda) - edge.target);
        if (rnew >= r) return;
        E = Enew;
        r = rnew;
        edge.e = E;
        if (r <= 1e-12) return;
    }
}

bool validate_sign_pattern(std::span<const double> agg, double lambda,
                           const std::vector<Interval>& bands) {
    const long n = static_cast<long>(bands.size());
    long stride = 1;
    if (n > 2048) stride = n / 1024;
    for (long i = 0; i < n; i += stride) {
        const Interval& b = bands[static_cast<std::size_t>(i)];
        if (b.length() > kValidateWidth) {
            if (std::fabs(disc_clamped(agg, b.midpoint(), lambda)) > 2.0 + kValidateTol)
                return false;
        }
        if (i + 1 < n) {
            const Interval& nb = bands[static_cast<std::size_t>(i + 1)];
            if (nb.lo - b.hi > kValidateWidth) {
                const double mid = 0.5 * (b.hi + nb.lo);
                if (std::fabs(disc_clamped(agg, mid, lambda)) < 2.0 - kValidateTol)
                    return false;
            }
        }
    }
    return true;
}

// dense scan + bisection on D -+ 2; last resort when the eigenvalue route
// and the discriminant disagree
std::vector<TaggedEdge> fallback_bisection_edges(std::span<const double> agg, double lambda,
                                                 const std::vector<TaggedEdge>& eigen, long q) {
    const double lo = eigen.front().e - 1.0;
    const double hi = eigen.back().e + 1.0;
    const long grid = std::max<long>(8192, 32 * q);
    std::vector<TaggedEdge> found;
    for (double target : {2.0, -2.0}) {
        double x0 = lo;
        double f0 = disc_clamped(agg, x0, lambda) - target;
        for (long i = 1; i <= grid; ++i) {
            const double x1 = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
            const double f1 = disc_clamped(agg, x1, lambda) - target;
            if (std::fabs(f1) < 1e-12) {
                found.push_back({x1, target});
            } else if (f0 * f1 < 0.0) {
                double a = x0, b = x1, fa = f0;
                for (int it = 0; it < 64; ++it) {
                    const double m = 0.5 * (a + b);
                    const double fm = disc_clamped(agg, m, lambda) - target;
                    if (fa * fm <= 0.0)
                        b = m;
                    else {
                        a = m;
                        fa = fm;
                    }
                }
                found.push_back({0.5 * (a + b), target});
            }
            x0 = x1;
            f0 = f1;
        }
    }
    if (static_cast<long>(found.size()) != 2 * q) return eigen;  // cannot improve
    std::sort(found.begin(), found.end(),
              [](const TaggedEdge& x, const TaggedEdge& y) { return x.e < y.e; });
    return found;
}

}  // namespace

BandSet band_edges(std::span<const double> aggregated, double lambda, const BandOptions& opts) {
    const long q = static_cast<long>(aggregated.size());
    if (q == 0) throw Error("DegenerateInput", "band_edges: empty word");
    std::vector<double> a(static_cast<std::size_t>(q));
    for (long i = 0; i < q; ++i) a[static_cast<std::size_t>(i)] = lambda * aggregated[i];

    std::vector<TaggedEdge> edges = eigen_edges(a);

    auto pair_up = [q](const std::vector<TaggedEdge>& es) {
        std::vector<Interval> bands;
        bands.reserve(static_cast<std::size_t>(q));
        for (long i = 0; i < q; ++i)
            bands.push_back({es[2 * static_cast<std::size_t>(i)].e,
                             es[2 * static_cast<std::size_t>(i) + 1].e});
        return bands;
    };

    // split edges into thin pairs (re-derived from D') and thick ones (polished)
    std::vector<Interval> bands = pair_up(edges);
    for (long i = 0; i < q; ++i) {
        Interval& band = bands[static_cast<std::size_t>(i)];
        const double w = band.length();
        if (opts.refine_thin && w < opts.thin_width) {
            const double c = band.midpoint();
            const ScaledValue dp = discriminant_derivative(aggregated, c, lambda);
            const double la = dp.log_abs();
            if (std::isfinite(la)) {
                // the discriminant swings by 4 across a band
                const double logw = std::log(4.0) - la;
                const double wref = logw < -700.0 ? 0.0 : std::exp(logw);
                if (wref <= 2.0 * opts.thin_width)
                    band = {c - 0.5 * wref, c + 0.5 * wref};
            }
        } else if (w >= opts.thin_width) {
            TaggedEdge el{band.lo, edges[2 * static_cast<std::size_t>(i)].target};
            TaggedEdge eh{band.hi, edges[2 * static_cast<std::size_t>(i) + 1].target};
            polish_edge(aggregated, lambda, el);
            polish_edge(aggregated, lambda, eh);
            if (el.e <= eh.e) band = {el.e, eh.e};
        }
    }

    if (!validate_sign_pattern(aggregated, lambda, bands)) {
        edges = fallback_bisection_edges(aggregated, lambda, edges, q);
        bands = pair_up(edges);
    }

    BandSet bs;
    bs.q = q;
    bs.bands = std::move(bands);
    return bs;
}

BandSet band_edges(const Word& x, double lambda, const BandOptions& opts) {
    return band_edges(std::span<const double>(x.aggregate()), lambda, opts);
}

bool in_spectrum(const Word& x, double E, double lambda) {
    const ScaledMat2 p = transfer_word_scaled(x.aggregate(), E, lambda);
    return p.log_abs_trace() <= std::log(2.0 + tol_hyp);
}

double measure_in_window(const BandSet& bands, const EnergyWindow& window) {
    double m = 0.0;
    for (const Interval& b : bands.bands)
        for (const Interval& w : window.parts()) {
            const double lo = std::max(b.lo, w.lo);
            const double hi = std::min(b.hi, w.hi);
            if (hi > lo) m += hi - lo;
        }
    return m;
}

double lyapunov(const Word& x, double E, double lambda) {
    const ScaledMat2 p = transfer_word_scaled(x.aggregate(), E, lambda);
    const double v = p.log_spectral_radius() / static_cast<double>(x.site_count());
    return v < 0.0 ? 0.0 : v;
}

double ids_from_bands(const BandSet& bands, std::span<const double> aggregated, double E,
                      double lambda) {
    const long q = bands.q;
    const double qd = static_cast<double>(q);
    if (bands.bands.empty()) throw Error("DegenerateInput", "ids: empty band set");
    if (E < bands.bands.front().lo) return 0.0;
    if (E > bands.bands.back().hi) return 1.0;
    for (long j = 1; j <= q; ++j) {
        const Interval& b = bands.bands[static_cast<std::size_t>(j - 1)];
        if (E < b.lo) return static_cast<double>(j - 1) / qd;  // in the gap below band j
        if (E <= b.hi) {
            // inside band j; s_j D(lower edge) = +2 with alternating sign
            const double sj = ((q - j) % 2 == 0) ? -1.0 : 1.0;
            const double D = disc_clamped(aggregated, E, lambda);
            const double c = std::clamp(sj * D / 2.0, -1.0, 1.0);
            return (static_cast<double>(j - 1) + std::acos(c) / std::numbers::pi) / qd;
        }
    }
    return 1.0;
}

double ids(const Word& x, double E, double lambda) {
    const BandSet bs = band_edges(x, lambda);
    return ids_from_bands(bs, x.aggregate(), E, lambda);
}

double ids_derivative_conjugacy(const Word& x, double E, double lambda) {
    const std::vector<double>& agg = x.aggregate();
    const long q = static_cast<long>(agg.size());
    const double D = discriminant(x, E, lambda);
    if (!(std::fabs(D) < 2.0 - tol_hyp))
        throw Error("NotInteriorOfBand", "ids_derivative_conjugacy: |D(E)| >= 2 - tol");
    double sum = 0.0;
    for (long j = 0; j < q; ++j) {
        const std::vector<double> shifted = cyclic_shift(agg, j);
        const Mat2 t = transfer_word(shifted, E, lambda);
        sum += hs_norm_sq(conjugator(t));
    }
    return sum / (4.0 * std::numbers::pi * static_cast<double>(q));
}

}  // namespace gaplab
