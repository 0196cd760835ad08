#include "gaplab/thin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>

namespace gaplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long checked_mul(long a, long b, const char* what) {
    if (a != 0 && b > std::numeric_limits<long>::max() / a) throw Error("LcmOverflow", what);
    return a * b;
}

}  // namespace

long FactoredWord::site_count() const {
    long n = 0;
    for (const auto& g : groups) {
        long per = 0;
        for (const auto& p : g.pieces) per += p.word.site_count() * p.repeat;
        n += per * g.repeat;
    }
    return n;
}

long FactoredWord::letter_count() const {
    long n = 0;
    for (const auto& g : groups) {
        long per = 0;
        for (const auto& p : g.pieces) per += p.word.letter_count() * p.repeat;
        n += per * g.repeat;
    }
    return n;
}

Word FactoredWord::flatten() const {
    Word out;
    bool first = true;
    for (const auto& g : groups) {
        Word block;
        bool bfirst = true;
        for (const auto& p : g.pieces) {
            Word rep = sharp_power(p.word, p.repeat);
            block = bfirst ? rep : concat(block, rep);
            bfirst = false;
        }
        if (bfirst) continue;
        Word grp = sharp_power(block, g.repeat);
        out = first ? grp : concat(out, grp);
        first = false;
    }
    return out;
}

namespace {

// M^e by repeated squaring; the determinant is pulled back to 1 after every
// multiply so drift cannot compound over thousands of squarings.
ScaledMat2 renorm_det(const ScaledMat2& s) {
    double d = s.m.det();
    if (d > 0.0 && std::isfinite(d)) {
        double r = std::sqrt(d);
        Mat2 m{s.m.a / r, s.m.b / r, s.m.c / r, s.m.d / r};
        ScaledMat2 out = rescale(m);
        out.log2_scale += s.log2_scale + 0.5 * std::log2(d);
        return out;
    }
    return s;
}

ScaledMat2 scaled_pow(ScaledMat2 base, long e) {
    ScaledMat2 acc = scaled_identity();
    while (e > 0) {
        if (e & 1) acc = renorm_det(scaled_mul(acc, base));
        e >>= 1;
        if (e > 0) base = renorm_det(scaled_mul(base, base));
    }
    return acc;
}

}  // namespace

ScaledMat2 factored_transfer(const FactoredWord& w, double E, double lambda) {
    // rightmost block acts first, so later groups multiply from the left
    ScaledMat2 acc = scaled_identity();
    for (const auto& g : w.groups) {
        ScaledMat2 grp = scaled_identity();
        for (const auto& p : g.pieces) {
            ScaledMat2 one = transfer_word_scaled(p.word.aggregate(), E, lambda);
            grp = scaled_mul(scaled_pow(one, p.repeat), grp);
        }
        acc = scaled_mul(scaled_pow(grp, g.repeat), acc);
    }
    return acc;
}

namespace {

// discriminant of the factored word as (mantissa, log2 exponent)
ScaledValue factored_disc(const FactoredWord& w, double E, double lambda) {
    ScaledMat2 sm = factored_transfer(w, E, lambda);
    double t = sm.m.trace();
    ScaledValue out;
    if (t == 0.0) return out;
    int ex = 0;
    out.mantissa = std::frexp(t, &ex);
    out.log2_scale = sm.log2_scale + ex;
    return out;
}

double disc_clamped_value(const ScaledValue& d) {
    if (d.mantissa == 0.0) return 0.0;
    double l2 = std::log2(std::fabs(d.mantissa)) + d.log2_scale;
    if (l2 > 995.0) return d.mantissa > 0.0 ? 1e300 : -1e300;
    return d.mantissa * std::exp2(d.log2_scale);
}

// log |D(c+h)-D(c-h)| - log(2h), evaluated without overflow: the two
// discriminants are aligned to a common exponent first.
double log_abs_dprime(const FactoredWord& w, double c, double h, double lambda) {
    ScaledValue a = factored_disc(w, c + h, lambda);
    ScaledValue b = factored_disc(w, c - h, lambda);
    if (a.mantissa == 0.0 && b.mantissa == 0.0) return -kInf;
    double s = std::max(a.mantissa == 0.0 ? -kInf : a.log2_scale,
                        b.mantissa == 0.0 ? -kInf : b.log2_scale);
    double da = a.mantissa == 0.0 ? 0.0 : a.mantissa * std::exp2(a.log2_scale - s);
    double db = b.mantissa == 0.0 ? 0.0 : b.mantissa * std::exp2(b.log2_scale - s);
    double diff = da - db;
    if (diff == 0.0) return -kInf;
    constexpr double kLn2 = 0.6931471805599453;
    return s * kLn2 + std::log(std::fabs(diff)) - std::log(2.0 * h);
}

struct ClusterScan {
    std::vector<Interval> bands;
    long found = 0;
};

// Bands inside one cluster box. On each band D moves monotonically from one
// of +-2 to the other, so it has exactly one zero per band and D is a degree-q
// polynomial with interlaced extrema. The scan therefore locates bands by
// their D zeros: grid samples split the box into segments bracketed by
// out-of-band points, every zero inside a segment is pinned by sign
// bisection, and segments holding several zeros are cut at the |D| maximum
// between consecutive zeros (golden section; gaps far below the grid still
// carry |D| > 2 at the extremum). Edges come from |D| = 2 bisection; only
// bands below ulp resolution fall back to the 4/|D'| width.
ClusterScan scan_cluster(const FactoredWord& w, double lambda, const BandCluster& cl) {
    const double lo = cl.box.lo, hi = cl.box.hi;
    ClusterScan out;
    auto disc_at = [&](double E) { return disc_clamped_value(factored_disc(w, E, lambda)); };

    if (!(hi > lo)) {
        if (std::fabs(disc_at(lo)) <= 2.0) {
            out.bands.push_back({lo, hi});
            out.found = 1;
        }
        return out;
    }

    auto ulp_at = [](double c) {
        return std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(c));
    };
    auto edge_bisect = [&](double a, double b) {
        // |D(a)|>2, |D(b)|<=2; a and b may sit either way on the axis
        for (int it = 0; it < 90 && std::fabs(b - a) > 0.0; ++it) {
            double m = 0.5 * (a + b);
            if (m == a || m == b) break;
            if (std::fabs(disc_at(m)) <= 2.0) b = m; else a = m;
        }
        return b;
    };
    auto zero_bisect = [&](double a, double b) {
        // pins the zero to ~1 ulp, which is all the band anchoring needs
        double da = disc_at(a);
        for (int it = 0; it < 110 && b - a > ulp_at(0.5 * (a + b)); ++it) {
            double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            double dm = disc_at(m);
            if ((dm < 0.0) == (da < 0.0)) { a = m; da = dm; } else { b = m; }
        }
        return 0.5 * (a + b);
    };
    auto deriv_width = [&](double c) {
        double h = std::max(4.0 * ulp_at(c), 1e-18);
        double ld = log_abs_dprime(w, c, h, lambda);
        double wd = std::isfinite(ld) ? std::exp(std::log(4.0) - ld) : 0.0;
        return wd > 0.0 ? wd : 0.0;
    };
    // every zero of D in [a, b]; sampling doubles until the count is stable,
    // brackets are only bisected once the count has settled
    auto zeros_between = [&](double a, double b, long hint) {
        std::vector<std::pair<double, double>> brs;
        long K = std::max<long>(16, 4 * std::max<long>(hint, 1));
        int stable = 0;
        std::size_t last = 0;
        while (true) {
            brs.clear();
            double px = a, pd = disc_at(a);
            for (long i = 1; i <= K; ++i) {
                double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(K);
                double d = disc_at(x);
                if (pd != 0.0 && (d == 0.0 || (d < 0.0) != (pd < 0.0))) brs.emplace_back(px, x);
                px = x;
                pd = d;
            }
            stable = (brs.size() == last) ? stable + 1 : 0;
            last = brs.size();
            if (stable >= 2 || K > (1L << 16)) break;
            K *= 2;
        }
        std::vector<double> zs;
        zs.reserve(brs.size());
        for (const auto& br : brs) zs.push_back(zero_bisect(br.first, br.second));
        return zs;
    };
    // point of largest |D| strictly between consecutive zeros; returns as
    // soon as a probe clears 2, the split threshold
    auto gap_probe = [&](double a, double b) {
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - r * (b - a), x2 = a + r * (b - a);
        double f1 = std::fabs(disc_at(x1)), f2 = std::fabs(disc_at(x2));
        for (int it = 0; it < 160 && b - a > 0.0; ++it) {
            if (f1 > 2.0) return x1;
            if (f2 > 2.0) return x2;
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = std::fabs(disc_at(x2));
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = std::fabs(disc_at(x1));
            }
        }
        return 0.5 * (a + b);
    };
    // a_out/b_out bracket the segment (NaN at a box edge); inner lies in-band
    auto resolve_segment = [&](double a_out, double b_out, double inner, long hint) {
        const double seg_lo = std::isnan(a_out) ? lo : a_out;
        const double seg_hi = std::isnan(b_out) ? hi : b_out;
        std::vector<double> zs = zeros_between(seg_lo, seg_hi, hint);
        auto push_zero_band = [&](double z, double wd) {
            wd = std::min(wd, seg_hi - seg_lo);
            out.bands.push_back({z - 0.5 * wd, z + 0.5 * wd});
        };
        if (zs.size() <= 1) {
            // a band far below ulp never pays for edge bisections
            double wd0 = zs.empty() ? 0.0 : deriv_width(zs[0]);
            if (zs.size() == 1 && wd0 > 0.0 && wd0 <= 2.0 * ulp_at(zs[0])) {
                push_zero_band(zs[0], wd0);
                return static_cast<long>(1);
            }
            // hull edges anchored at the zero: between a_out and the zero
            // |D| crosses 2 exactly once (a band without a zero of D cannot
            // exist), so these bisections cannot pick an inner crossing
            double L = std::isnan(a_out) ? lo : edge_bisect(a_out, zs.empty() ? inner : zs.front());
            double R = std::isnan(b_out) ? hi : edge_bisect(b_out, zs.empty() ? inner : zs.back());
            if (R < L) std::swap(L, R);
            double c = zs.empty() ? 0.5 * (L + R) : zs[0];
            if (R - L <= 8.0 * ulp_at(c)) {
                push_zero_band(c, deriv_width(c));
            } else {
                out.bands.push_back({L, R});
            }
            return static_cast<long>(1);
        }
        double L = std::isnan(a_out) ? lo : edge_bisect(a_out, zs.front());
        double R = std::isnan(b_out) ? hi : edge_bisect(b_out, zs.back());
        if (R < L) std::swap(L, R);
        double left = L;
        std::size_t first_z = 0;
        for (std::size_t k = 0; k < zs.size(); ++k) {
            double right = R, next_left = R;
            bool closes = true;
            if (k + 1 < zs.size()) {
                double m = gap_probe(zs[k], zs[k + 1]);
                if (std::fabs(disc_at(m)) > 2.0) {
                    right = edge_bisect(m, zs[k]);
                    next_left = edge_bisect(m, zs[k + 1]);
                } else {
                    closes = false;  // gap numerically closed: merge across it
                }
            }
            if (closes) {
                if (k == first_z && right - left <= 8.0 * ulp_at(zs[k])) {
                    push_zero_band(zs[k], deriv_width(zs[k]));
                } else {
                    out.bands.push_back({left, right});
                }
                left = next_left;
                first_z = k + 1;
            }
        }
        return static_cast<long>(zs.size());
    };

    long P = std::max<long>(64, 8 * std::max<long>(cl.expected, 1));
    const long Pmax = std::max<long>(4096, 64 * std::max<long>(cl.expected, 1));
    while (true) {
        out.bands.clear();
        out.found = 0;
        std::vector<double> xs(P + 1), ds(P + 1);
        for (long i = 0; i <= P; ++i) {
            xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(P);
            ds[i] = disc_at(xs[i]);
        }

        long i = 0;
        while (i <= P) {
            if (std::fabs(ds[i]) <= 2.0) {
                long j = i;
                while (j + 1 <= P && std::fabs(ds[j + 1]) <= 2.0) ++j;
                const double a_out = (i == 0) ? std::nan("") : xs[i - 1];
                const double b_out = (j == P) ? std::nan("") : xs[j + 1];
                out.found += resolve_segment(a_out, b_out, xs[i], j - i + 1);
                i = j + 1;
            } else {
                if (i + 1 <= P && std::fabs(ds[i + 1]) > 2.0 &&
                    (ds[i] < 0.0) != (ds[i + 1] < 0.0)) {
                    double c = zero_bisect(xs[i], xs[i + 1]);
                    out.found += resolve_segment(xs[i], xs[i + 1], c, 1);
                }
                ++i;
            }
        }

        if (out.found >= cl.expected || P >= Pmax) break;
        P *= 4;
    }

    if (out.found < cl.expected && !out.bands.empty()) {
        // sub-bands still hidden between same-sign samples: charge each at
        // the widest observed width so the reported measure errs large
        double wmax = 0.0;
        Interval widest = out.bands.front();
        for (const auto& b : out.bands) {
            wmax = std::max(wmax, b.length());
            if (b.length() >= widest.length()) widest = b;
        }
        for (long k = out.found; k < cl.expected; ++k)
            out.bands.push_back({widest.midpoint() - 0.5 * wmax, widest.midpoint() + 0.5 * wmax});
    }
    if (out.bands.empty() && cl.expected > 0)
        throw Error("CoverageFailure", "cluster box resolved no bands");
    return out;
}

}  // namespace

BandSet clustered_bands(const FactoredWord& w, double lambda,
                        const std::vector<BandCluster>& clusters) {
    BandSet out;
    out.q = w.site_count();
    for (const auto& cl : clusters) {
        ClusterScan sc = scan_cluster(w, lambda, cl);
        out.bands.insert(out.bands.end(), sc.bands.begin(), sc.bands.end());
    }
    std::sort(out.bands.begin(), out.bands.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return out;
}

namespace {

long default_lift(long seed_sites) {
    if (seed_sites >= 24) return 1;
    return (28 + seed_sites - 1) / seed_sites;
}

struct LiveMember {
    Word word;
    long raw_blocks = 1;
    std::vector<Interval> covered;
    std::vector<BandSet> bands;  // aligned with the coupling grid
};

// gap component of the member containing f, intersected over the coupling
// grid; nullopt when f touches any of the member's spectra
std::optional<Interval> common_gap(const LiveMember& mem, double f) {
    Interval g{-1e18, 1e18};
    for (const auto& bs : mem.bands) {
        double glo = -1e18, ghi = 1e18;
        for (const auto& b : bs.bands) {
            if (b.lo > f) { ghi = std::min(ghi, b.lo); break; }
            if (f <= b.hi) return std::nullopt;  // inside or at the edge of a band
            glo = std::max(glo, b.hi);
        }
        g.lo = std::max(g.lo, glo);
        g.hi = std::min(g.hi, ghi);
    }
    if (g.lo < f && f < g.hi) return g;
    return std::nullopt;
}

long lcm_blocks(long a, long b) {
    long g = std::gcd(a, b);
    return checked_mul(a / g, b, "cover common period");
}

}  // namespace

GapCover build_gap_cover(const Word& a, const EnergyWindow& K, double eps,
                         const std::vector<double>& couplings, const FamilySpec& family,
                         double grid_step, const CoverOptions& opts) {
    family.validate();
    if (a.empty() || a.block_size() != family.block_size())
        throw Error("DegenerateInput", "cover seed does not match the family alphabet");
    if (K.empty()) throw Error("DegenerateInput", "cover window is empty");
    if (!(eps > 0.0)) throw Error("DegenerateInput", "cover eps must be positive");
    if (!(grid_step > 0.0)) throw Error("DegenerateInput", "grid_step must be positive");
    if (couplings.empty()) throw Error("DegenerateInput", "empty coupling grid");
    for (double l : couplings)
        if (l == 0.0) throw Error("DegenerateInput", "coupling zero");

    ExceptionalSet S = exceptional_set(family);
    for (const auto& part : K.parts())
        for (double s : S.points)
            if (s > part.lo - grid_step && s < part.hi + grid_step)
                throw Error("ExceptionalEnergy",
                            "cover window approaches the exceptional set closer than grid_step");

    const long p = a.letter_count();
    const long lift =
        opts.lift_blocks > 0 ? opts.lift_blocks : default_lift(a.site_count());
    const Word seed = lift == 1 ? a : sharp_power(a, lift);

    std::vector<LiveMember> members;
    auto bands_of = [&](const Word& w) {
        std::vector<BandSet> per;
        per.reserve(couplings.size());
        for (double l : couplings) per.push_back(band_edges(w, l));
        return per;
    };

    for (const auto& part : K.parts()) {
        double f = part.lo;
        long steps = 0;
        while (f <= part.hi) {
            if (++steps > 100000)
                throw Error("CoverageFailure", "frontier stalled; refine grid_step");

            int best = -1;
            Interval bg{0.0, 0.0};
            for (std::size_t i = 0; i < members.size(); ++i) {
                auto g = common_gap(members[i], f);
                if (g && (best < 0 || g->hi > bg.hi)) {
                    best = static_cast<int>(i);
                    bg = *g;
                }
            }

            if (best < 0) {
                const double w = std::max(part.length(), 1e-300);
                double probes[3] = {f + std::min(grid_step / 2.0, w / 8.0),
                                    f + std::min(grid_step / 8.0, w / 64.0), f};
                for (double& pr : probes) pr = std::min(pr, part.hi);
                for (double pr : probes) {
                    if (best >= 0) break;
                    for (double l : couplings) {
                        FamilySpec fam = family;
                        fam.coupling = l;
                        GapCertificate cert;
                        try {
                            cert = open_gap(seed, pr, eps, fam, opts.depth_cap);
                        } catch (const Error&) {
                            continue;
                        }
                        int idx = -1;
                        for (std::size_t i = 0; i < members.size(); ++i)
                            if (members[i].word == cert.word) { idx = static_cast<int>(i); break; }
                        if (idx < 0) {
                            if (static_cast<long>(members.size()) >= opts.member_cap)
                                throw Error("CoverageFailure", "member cap exceeded");
                            LiveMember mem;
                            mem.word = cert.word;
                            mem.raw_blocks = std::max<long>(1, cert.word.letter_count() / p);
                            mem.bands = bands_of(cert.word);
                            members.push_back(std::move(mem));
                            idx = static_cast<int>(members.size()) - 1;
                        }
                        auto g = common_gap(members[idx], f);
                        if (g) {
                            best = idx;
                            bg = *g;
                            break;
                        }
                    }
                }
                if (best < 0)
                    throw Error("CoverageFailure", "no gap found at the frontier");
            }

            members[best].covered.push_back({f, std::min(bg.hi, part.hi)});
            if (bg.hi > part.hi) break;
            f = bg.hi;
        }
    }

    GapCover cover;
    cover.t = 1;
    for (const auto& mem : members) cover.t = lcm_blocks(cover.t, mem.raw_blocks);
    if (checked_mul(cover.t, p, "cover period") * a.block_size() > 1000000)
        throw Error("LcmOverflow", "common cover period exceeds the letter budget");
    for (auto& mem : members) {
        CoverMember cm;
        cm.raw_blocks = mem.raw_blocks;
        cm.covered = std::move(mem.covered);
        cm.word = cover.t == mem.raw_blocks ? std::move(mem.word)
                                            : sharp_power(mem.word, cover.t / mem.raw_blocks);
        cover.members.push_back(std::move(cm));
    }
    return cover;
}

Word assemble_thin_word(const GapCover& cover, const Word& a, long N) {
    return factored_thin_word(cover, a, N).flatten();
}

FactoredWord factored_thin_word(const GapCover& cover, const Word& a, long N) {
    if (cover.members.empty()) throw Error("DegenerateInput", "cover has no members");
    const long mt = cover.m() * cover.t;
    if (N < mt) throw Error("NTooSmall", "N is below m*t");
    const long u = N / mt;
    const long r = N - mt * u;

    FactoredWord fw;
    const long p = a.letter_count();
    for (const auto& mem : cover.members) {
        // the lifted word is raw^{t/raw_blocks}: evaluating the raw period
        // with a repeat keeps flatten() identical and the transfer cheap
        const long rep = mem.raw_blocks > 0 ? cover.t / mem.raw_blocks : 1;
        if (rep > 1 && mem.word.letter_count() == cover.t * p) {
            const auto& flat = mem.word.aggregate();
            std::vector<double> head(flat.begin(),
                                     flat.begin() + mem.raw_blocks * p * mem.word.block_size());
            fw.groups.push_back({{{Word(mem.word.block_size(), std::move(head)), rep}}, u});
        } else {
            fw.groups.push_back({{{mem.word, 1}}, u});
        }
    }
    if (r > 0) fw.groups.push_back({{{a, 1}}, r});
    return fw;
}

namespace {

double max_abs_value(const Word& w) {
    double m = 0.0;
    for (double v : w.aggregate()) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_coupling(const std::vector<double>& couplings) {
    double m = 0.0;
    for (double l : couplings) m = std::max(m, std::fabs(l));
    return m;
}

// least squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) return 0.0;
    return (n * sxy - sx * sy) / den;
}

std::vector<double> window_grid(const EnergyWindow& K, int count) {
    std::vector<double> pts;
    double total = K.measure();
    if (total <= 0.0) {
        for (const auto& part : K.parts()) pts.push_back(part.lo);
        return pts;
    }
    for (int i = 0; i < count; ++i) {
        double s = total * (i + 0.5) / count;
        for (const auto& part : K.parts()) {
            if (s <= part.length()) {
                pts.push_back(part.lo + s);
                break;
            }
            s -= part.length();
        }
    }
    return pts;
}

}  // namespace

std::vector<ThinTrace> decay_experiment(const GapCover& cover, const Word& a,
                                        const EnergyWindow& K, const std::vector<long>& N_list,
                                        const std::vector<double>& couplings) {
    if (cover.members.empty()) throw Error("DegenerateInput", "cover has no members");
    if (N_list.empty()) throw Error("DegenerateInput", "empty N list");
    for (std::size_t i = 1; i < N_list.size(); ++i)
        if (N_list[i] <= N_list[i - 1]) throw Error("DegenerateInput", "N list must increase");
    if (couplings.empty()) throw Error("DegenerateInput", "empty coupling grid");

    const long mt = cover.m() * cover.t;
    const long p = a.letter_count();
    const int k = a.block_size();

    double vmax = max_abs_value(a);
    for (const auto& mem : cover.members) vmax = std::max(vmax, max_abs_value(mem.word));
    const double reach = 2.0 + max_abs_coupling(couplings) * vmax + 1.0;

    // L_min diagnostic: worst case over a window grid of the best member rate
    double L_min = kInf;
    for (double E : window_grid(K, 64)) {
        for (double l : couplings) {
            double best = 0.0;
            for (const auto& mem : cover.members)
                best = std::max(best, lyapunov(mem.word, E, l));
            L_min = std::min(L_min, best);
        }
    }
    if (!std::isfinite(L_min)) L_min = 0.0;

    std::vector<ThinTrace> traces;
    for (long N : N_list) {
        FactoredWord fw = factored_thin_word(cover, a, N);
        ThinTrace tr;
        tr.N = N;
        tr.u = N / mt;
        tr.word_length = N * p * k;
        tr.L_min_estimate = L_min;
        std::vector<BandCluster> box{{Interval{-reach, reach}, fw.site_count()}};
        for (double l : couplings) {
            BandSet bs = clustered_bands(fw, l, box);
            tr.measure_by_lambda.emplace_back(l, measure_in_window(bs, K));
        }
        traces.push_back(std::move(tr));
    }

    std::vector<double> xs, ys;
    for (const auto& tr : traces) {
        double worst = 0.0;
        for (const auto& [l, m] : tr.measure_by_lambda) worst = std::max(worst, m);
        if (worst > 0.0) {
            xs.push_back(static_cast<double>(tr.N));
            ys.push_back(std::log(worst));
        }
    }
    double c0 = xs.size() >= 2 ? -ls_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
    for (auto& tr : traces) tr.c0 = c0;
    return traces;
}

namespace {

EnergyWindow stage_window(double eta, const std::vector<double>& S) {
    EnergyWindow box = EnergyWindow::single(-1.0 / eta, 1.0 / eta);
    return box.subtract_balls(S, eta);
}

bool meets_interior(const std::vector<BandSet>& per_lambda, const EnergyWindow& F) {
    for (const auto& bs : per_lambda) {
        bool hit = false;
        for (const auto& b : bs.bands) {
            double c = b.midpoint();
            for (const auto& part : F.parts())
                if (c > part.lo && c < part.hi) { hit = true; break; }
            if (hit) break;
        }
        if (!hit) return false;
    }
    return true;
}

// previous-stage bands inflated by the perturbation radius and merged;
// expected sub-band counts follow the merge multiplicities
std::vector<BandCluster> make_clusters(const BandSet& prev, double radius, long N) {
    std::vector<BandCluster> cl;
    for (const auto& b : prev.bands) {
        double pad = radius + 1e-12 * std::max(1.0, std::fabs(b.midpoint()));
        Interval box{b.lo - pad, b.hi + pad};
        if (!cl.empty() && box.lo <= cl.back().box.hi) {
            cl.back().box.hi = std::max(cl.back().box.hi, box.hi);
            cl.back().expected += N;
        } else {
            cl.push_back({box, N});
        }
    }
    return cl;
}

}  // namespace

std::vector<StageState> run_stages(const Word& x0, double eps0, int stages,
                                   const FamilySpec& family, const std::vector<double>& couplings,
                                   double eta0, const StageOptions& opts) {
    family.validate();
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw Error("DegenerateInput", "eps0 must be in (0,1)");
    if (!(eta0 > 0.0)) throw Error("DegenerateInput", "eta0 must be positive");
    if (stages < 0) throw Error("DegenerateInput", "stage count negative");
    if (couplings.empty()) throw Error("DegenerateInput", "empty coupling grid");
    if (!(opts.eps_fraction > 0.0 && opts.eps_fraction < 0.5))
        throw Error("DegenerateInput", "eps_fraction must sit in (0, 1/2)");
    if (!(opts.eta_factor > 0.0 && opts.eta_factor < 1.0))
        throw Error("DegenerateInput", "eta_factor must sit in (0, 1)");
    if (x0.empty() || x0.block_size() != family.block_size())
        throw Error("DegenerateInput", "seed word does not match the family alphabet");

    const std::vector<double> S = exceptional_set(family).points;
    const double lam_max = max_abs_coupling(couplings);

    std::vector<StageState> states;

    EnergyWindow F0 = stage_window(eta0, S);
    if (F0.empty()) throw Error("WindowEmpty", "initial window is empty");
    std::vector<BandSet> prev_bands;
    for (double l : couplings) prev_bands.push_back(band_edges(x0, l));
    if (!meets_interior(prev_bands, F0))
        throw Error("WindowEmpty", "initial window misses the spectrum");

    StageState s0;
    s0.stage = 0;
    s0.x = x0;
    s0.eps = eps0;
    s0.eta = eta0;
    s0.p = x0.letter_count();
    s0.F = F0;
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        s0.measure_by_lambda.emplace_back(couplings[i], measure_in_window(prev_bands[i], F0));
        s0.bands_by_lambda.emplace_back(couplings[i], prev_bands[i]);
    }
    states.push_back(std::move(s0));

    for (int l = 1; l <= stages; ++l) {
        const StageState& prev = states.back();
        const double eta = prev.eta * opts.eta_factor;
        EnergyWindow F = stage_window(eta, S);
        if (F.empty()) throw Error("WindowEmpty", "stage window is empty");

        double min_meas = kInf;
        for (const auto& [lam, m] : prev.measure_by_lambda) min_meas = std::min(min_meas, m);
        if (!(min_meas > 0.0))
            throw Error("WindowEmpty", "previous stage has no measure left in its window");
        const double eps = opts.eps_fraction * std::min(prev.eps, 0.25 * min_meas);

        // cover target: the window restricted to where spectra of eps-close
        // words can live at all
        std::vector<Interval> inflated;
        const double radius = lam_max * eps;
        for (const auto& bs : prev_bands)
            for (const auto& b : bs.bands) inflated.push_back({b.lo - radius, b.hi + radius});
        EnergyWindow K = EnergyWindow(std::move(inflated)).intersect(F);
        if (K.empty())
            throw Error("WindowEmpty", "window avoids every reachable spectrum");

        double gs = std::min(opts.grid_step, 0.5 * eta);
        for (const auto& part : K.parts()) gs = std::min(gs, std::max(part.length(), 1e-300));
        CoverOptions copts = opts.cover;
        if (copts.lift_blocks == 0) {
            // keep seeds short inside the iteration: every extra seed block
            // multiplies t and with it the smallest admissible N = m*t
            const long sites = std::max<long>(prev.x.site_count(), 1);
            copts.lift_blocks = sites >= 4 ? 1 : (4 + sites - 1) / sites;
        }
        GapCover cover = build_gap_cover(prev.x, K, eps, couplings, family, gs, copts);

        const long mt = cover.m() * cover.t;
        const long p_prev = prev.p;

        struct Attempt {
            std::vector<BandSet> bands;
            std::vector<std::pair<double, double>> measures;
            bool thin = false;  // the measure bound alone
            bool pass = false;  // thin and spectrum left inside int F
        };
        auto attempt = [&](long N) {
            Attempt at;
            FactoredWord fw = factored_thin_word(cover, prev.x, N);
            double worst = 0.0;
            for (std::size_t i = 0; i < couplings.size(); ++i) {
                BandSet bs = clustered_bands(fw, couplings[i],
                                             make_clusters(prev_bands[i], radius, N));
                double m = measure_in_window(bs, F);
                worst = std::max(worst, m);
                at.measures.emplace_back(couplings[i], m);
                at.bands.push_back(std::move(bs));
            }
            at.thin = worst < std::exp(-std::sqrt(static_cast<double>(N) * p_prev));
            at.pass = at.thin && meets_interior(at.bands, F);
            return at;
        };

        long N_hi = mt;
        Attempt hit;
        while (true) {
            if (checked_mul(N_hi, p_prev, "stage period") > opts.letter_cap)
                throw Error("StageBudgetExceeded", "stage period exceeds the letter cap");
            hit = attempt(N_hi);
            if (hit.pass) break;
            // when every member spectrum fled the window the word needs a
            // free tail: N just past a multiple of m*t restores in-window
            // spectrum without hurting the measure bound
            if (hit.thin && N_hi % mt == 0 &&
                checked_mul(N_hi + 1, p_prev, "stage period") <= opts.letter_cap) {
                Attempt at = attempt(N_hi + 1);
                if (at.pass) {
                    N_hi += 1;
                    hit = std::move(at);
                    break;
                }
            }
            N_hi *= 2;
        }
        long lo = std::max(mt, N_hi / 2 + 1), hi = N_hi;
        while (lo < hi) {
            long mid = lo + (hi - lo) / 2;
            Attempt at = attempt(mid);
            if (at.pass) {
                hi = mid;
                hit = std::move(at);
            } else {
                lo = mid + 1;
            }
        }
        const long N = hi;

        StageState st;
        st.stage = l;
        st.x = assemble_thin_word(cover, prev.x, N);
        st.eps = eps;
        st.eta = eta;
        st.p = N * p_prev;
        st.F = F;
        st.measure_by_lambda = hit.measures;
        for (std::size_t i = 0; i < couplings.size(); ++i)
            st.bands_by_lambda.emplace_back(couplings[i], hit.bands[i]);

        const double dist = word_distance(st.x, prev.x);
        if (!(dist < eps))
            throw Error("CoverageFailure", "assembled word drifted beyond eps");
        if (!meets_interior(hit.bands, F))
            throw Error("WindowEmpty", "stage spectrum left the window");

        prev_bands = std::move(hit.bands);
        states.push_back(std::move(st));
    }
    return states;
}

DimensionEstimate box_dimension_estimate(const BandSet& bands, const EnergyWindow& window,
                                         const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw Error("DegenerateInput", "empty eps list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw Error("DegenerateInput", "eps must be positive");
        if (i > 0 && eps_list[i] >= eps_list[i - 1])
            throw Error("DegenerateInput", "eps list must decrease");
    }

    EnergyWindow S = bands.as_window().intersect(window);
    DimensionEstimate est;
    std::vector<double> xs, ys;
    for (double eps : eps_list) {
        const double guard = eps * 1e-9;
        long n = 0;
        double covered = -kInf;
        for (const auto& part : S.parts()) {
            if (part.hi <= covered + guard) continue;
            double x = std::max(part.lo, covered);
            while (true) {
                ++n;
                covered = x + eps;
                if (part.hi <= covered + guard) break;
                x = covered;
            }
        }
        est.counts.push_back(n);
        if (n > 0) {
            xs.push_back(std::log(1.0 / eps));
            ys.push_back(std::log(static_cast<double>(n)));
        }
    }
    est.slope = xs.size() >= 2 ? ls_slope(xs, ys) : 0.0;
    return est;
}

}  // namespace gaplab
