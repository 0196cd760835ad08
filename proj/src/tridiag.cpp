#include "gaplab/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaplab/mat2.hpp"

namespace gaplab {

namespace {

double pythag(double x, double y) { return std::hypot(x, y); }

}  // namespace

std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e) {
    const long n = static_cast<long>(d.size());
    if (n == 0) return {};
    if (static_cast<long>(e.size()) != n - 1)
        throw Error("DegenerateInput", "tridiag_eigenvalues: off-diagonal length mismatch");
    if (n == 1) return d;
    e.push_back(0.0);

    const double eps = std::numeric_limits<double>::epsilon();
    for (long l = 0; l < n; ++l) {
        long iter = 0;
        for (;;) {
            long m = l;
            while (m < n - 1) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
                ++m;
            }
            if (m == l) break;
            if (++iter > 50)
                throw Error("DegenerateInput", "tridiag_eigenvalues: QL failed to converge");
            // implicit shift from the 2x2 in rows l, l+1
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            for (long i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if (r == 0.0) {  // recover from underflow; deflate and retry
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if (i == l) {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

long cyclic_inertia_below(std::span<const double> a, double corner, double sigma) {
    const long q = static_cast<long>(a.size());
    if (q < 3)
        throw Error("DegenerateInput", "cyclic_inertia_below: need q >= 3");
    const double tiny = 1e-300;
    long cnt = 0;
    double d = a[0] - sigma;       // running pivot
    double last = a[q - 1] - sigma;  // running (q-1,q-1) entry
    double w = corner;             // running (q-1, i) entry
    for (long i = 0; i + 2 < q; ++i) {
        if (d == 0.0) d = tiny;
        if (d < 0.0) ++cnt;
        const double inv = 1.0 / d;
        const double dnext = a[i + 1] - sigma - inv;  // unit hop below diagonal
        last -= w * w * inv;
        const double wnext = (i + 2 == q - 1 ? 1.0 : 0.0) - w * inv;
        d = dnext;
        w = wnext;
    }
    // column q-2: its only sub-entry is the merged (q-1, q-2) value w
    if (d == 0.0) d = tiny;
    if (d < 0.0) ++cnt;
    last -= w * w / d;
    if (last < 0.0) ++cnt;
    return cnt;
}

std::vector<double> cyclic_tridiag_eigenvalues(std::span<const double> a, double corner) {
    const long q = static_cast<long>(a.size());
    if (q < 3)
        throw Error("DegenerateInput", "cyclic_tridiag_eigenvalues: need q >= 3");
    if (corner != 1.0 && corner != -1.0)
        throw Error("DegenerateInput", "cyclic_tridiag_eigenvalues: corner must be +-1");

    // split: A = T~ + u u^T with u = e_0 +- e_{q-1}, ||u||^2 = 2.
    std::vector<double> diag(a.begin(), a.end());
    diag.front() -= 1.0;
    diag.back() -= 1.0;
    std::vector<double> base = tridiag_eigenvalues(std::move(diag), std::vector<double>(q - 1, 1.0));

    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<double> out(static_cast<std::size_t>(q));
    const double span_scale =
        std::max(std::fabs(base.front()), std::fabs(base.back() + 2.0)) + 1.0;
    for (long j = 1; j <= q; ++j) {
        double lo = base[j - 1];
        double hi = (j < q) ? base[j] : base[q - 1] + 2.0;
        // widen until the count certifies the bracket; rounding in QL output
        // can put an eigenvalue a few ulp outside
        double pad = 16.0 * eps * span_scale;
        while (cyclic_inertia_below(a, corner, lo) >= j) {
            lo -= pad;
            pad *= 4.0;
        }
        pad = 16.0 * eps * span_scale;
        while (cyclic_inertia_below(a, corner, hi) < j) {
            hi += pad;
            pad *= 4.0;
        }
        while (hi - lo > 2.0 * eps * (std::fabs(lo) + std::fabs(hi)) + 1e-300) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (cyclic_inertia_below(a, corner, mid) >= j)
                hi = mid;
            else
                lo = mid;
        }
        out[j - 1] = 0.5 * (lo + hi);
    }
    return out;
}

}  // namespace gaplab
