#include "gaplab/transfer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace gaplab {

Mat2 transfer_single(double v, double E) {
    return {E - v, -1.0, 1.0, 0.0};
}

Mat2 transfer_word(std::span<const double> v, double E, double lambda) {
    Mat2 p = Mat2::identity();
    std::size_t since_renorm = 0;
    for (double site : v) {
        p = mul(transfer_single(lambda * site, E), p);
        if (++since_renorm == 64) {
            since_renorm = 0;
            const double det = p.det();
            if (det > 0.0 && std::isfinite(det)) {
                const double s = 1.0 / std::sqrt(det);
                p = {p.a * s, p.b * s, p.c * s, p.d * s};
            }
        }
    }
    return p;
}

Mat2 transfer_word(const Word& x, double E, double lambda) {
    return transfer_word(std::span<const double>(x.aggregate()), E, lambda);
}

double discriminant(const Word& x, double E, double lambda) {
    return transfer_word(x, E, lambda).trace();
}

double ScaledMat2::log_abs_trace() const {
    const double t = std::fabs(m.trace());
    if (t == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(t) + log2_scale * std::numbers::ln2_v<double>;
}

double ScaledMat2::log_spectral_radius() const {
    const double lt = log_abs_trace();
    if (lt < 2.0) {  // |trace| < e^2, safe to materialize and decide exactly
        const double t = std::fabs(m.trace()) * std::exp2(log2_scale);
        if (t < 2.0) return 0.0;
        return std::log(0.5 * (t + std::sqrt(t * t - 4.0)));
    }
    // log((|t| + sqrt(t^2-4))/2) = log|t| + log1p(sqrt(1-4/t^2)) - log 2
    const double s = std::sqrt(std::max(0.0, 1.0 - 4.0 * std::exp(-2.0 * lt)));
    return lt + std::log1p(s) - std::numbers::ln2_v<double>;
}

ScaledMat2 scaled_identity() { return {Mat2::identity(), 0.0}; }

ScaledMat2 rescale(const Mat2& m) {
    const double mx = max_abs_entry(m);
    if (mx == 0.0 || !std::isfinite(mx)) return {m, 0.0};
    int e = 0;
    std::frexp(mx, &e);  // mx = f * 2^e, f in [0.5, 1)
    const double s = std::ldexp(1.0, -e);
    return {{m.a * s, m.b * s, m.c * s, m.d * s}, static_cast<double>(e)};
}

ScaledMat2 scaled_mul(const ScaledMat2& lhs, const ScaledMat2& rhs) {
    ScaledMat2 out = rescale(mul(lhs.m, rhs.m));
    out.log2_scale += lhs.log2_scale + rhs.log2_scale;
    return out;
}

ScaledMat2 transfer_word_scaled(std::span<const double> v, double E, double lambda) {
    ScaledMat2 p = scaled_identity();
    Mat2 chunk = Mat2::identity();
    std::size_t in_chunk = 0;
    auto flush = [&] {
        if (in_chunk == 0) return;
        const ScaledMat2 sc = rescale(chunk);
        ScaledMat2 next = rescale(mul(sc.m, p.m));
        next.log2_scale += sc.log2_scale + p.log2_scale;
        p = next;
        chunk = Mat2::identity();
        in_chunk = 0;
    };
    for (double site : v) {
        chunk = mul(transfer_single(lambda * site, E), chunk);
        if (++in_chunk == 16) flush();
    }
    flush();
    return p;
}

double ScaledValue::value() const { return mantissa * std::exp2(log2_scale); }

double ScaledValue::log_abs() const {
    if (mantissa == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::fabs(mantissa)) + log2_scale * std::numbers::ln2_v<double>;
}

ScaledValue discriminant_derivative(std::span<const double> v, double E, double lambda) {
    const long q = static_cast<long>(v.size());
    if (q == 0) return {0.0, 0.0};
    // Each factor differentiates to [[1,0],[0,0]], so with prefixes
    // L_j = T_j...T_1 and suffixes R_j = T_q...T_{j+1},
    // D'(E) = sum_j tr(R_j [[1,0],[0,0]] L_{j-1}) = sum_j (L_{j-1} R_j)_{11}.
    std::vector<ScaledMat2> prefix(static_cast<std::size_t>(q) + 1);
    prefix[0] = scaled_identity();
    for (long j = 0; j < q; ++j)
        prefix[j + 1] = scaled_mul(rescale(transfer_single(lambda * v[j], E)), prefix[j]);
    std::vector<ScaledMat2> suffix(static_cast<std::size_t>(q) + 1);
    suffix[q] = scaled_identity();
    for (long j = q - 1; j >= 0; --j)
        suffix[j] = scaled_mul(suffix[j + 1], rescale(transfer_single(lambda * v[j], E)));

    double best_scale = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(q));
    std::vector<double> scales(static_cast<std::size_t>(q));
    for (long j = 1; j <= q; ++j) {
        const Mat2& L = prefix[j - 1].m;
        const Mat2& R = suffix[j].m;
        terms[j - 1] = L.a * R.a + L.b * R.c;  // (L R)_{11}
        scales[j - 1] = prefix[j - 1].log2_scale + suffix[j].log2_scale;
        if (terms[j - 1] != 0.0 && scales[j - 1] > best_scale) best_scale = scales[j - 1];
    }
    if (!std::isfinite(best_scale)) return {0.0, 0.0};
    double acc = 0.0;
    for (long j = 0; j < q; ++j) {
        const double shift = scales[j] - best_scale;
        if (shift > -1080.0) acc += terms[j] * std::exp2(shift);
    }
    if (acc == 0.0) return {0.0, 0.0};
    int e = 0;
    const double f = std::frexp(acc, &e);
    return {f * 2.0, best_scale + static_cast<double>(e - 1)};
}

EnergyGrid EnergyGrid::uniform(double lo, double hi, long count) {
    if (!(lo < hi) || count < 2)
        throw Error("DegenerateInput", "EnergyGrid: need lo < hi and count >= 2");
    EnergyGrid g;
    g.points.resize(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        g.points[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

void EnergyGrid::validate() const {
    if (points.size() < 2)
        throw Error("DegenerateInput", "EnergyGrid: need at least two points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1]))
            throw Error("DegenerateInput", "EnergyGrid: points must be strictly increasing");
}

}  // namespace gaplab
