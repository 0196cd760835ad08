#include "gaplab/mat2.hpp"

#include <cmath>

namespace gaplab {

Mat2 mul(const Mat2& lhs, const Mat2& rhs) {
    return {lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
            lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
}

double frobenius_norm(const Mat2& m) {
    return std::sqrt(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
}

double max_abs_entry(const Mat2& m) {
    return std::max(std::max(std::fabs(m.a), std::fabs(m.b)),
                    std::max(std::fabs(m.c), std::fabs(m.d)));
}

const char* to_string(TraceClass t) {
    switch (t) {
        case TraceClass::Elliptic: return "Elliptic";
        case TraceClass::Parabolic: return "Parabolic";
        case TraceClass::Hyperbolic: return "Hyperbolic";
        case TraceClass::PlusMinusIdentity: return "PlusMinusIdentity";
    }
    return "?";
}

TraceClass classify(const Mat2& m, double tol) {
    const double t = std::fabs(m.trace());
    if (t < 2.0 - tol) return TraceClass::Elliptic;
    if (t > 2.0 + tol) return TraceClass::Hyperbolic;
    const double s = m.trace() < 0.0 ? -1.0 : 1.0;
    const bool pmi = std::fabs(m.a - s) <= tol && std::fabs(m.b) <= tol &&
                     std::fabs(m.c) <= tol && std::fabs(m.d - s) <= tol;
    return pmi ? TraceClass::PlusMinusIdentity : TraceClass::Parabolic;
}

double spectral_radius(const Mat2& m) {
    const double t = std::fabs(m.trace());
    if (t < 2.0) return 1.0;
    return 0.5 * (t + std::sqrt(t * t - 4.0));
}

FixedPoint mobius_fixed_point(const Mat2& m) {
    if (classify(m) != TraceClass::Elliptic)
        throw Error("NotElliptic", "mobius_fixed_point: matrix not elliptic, trace outside (-2,2)");
    // roots of c z^2 + (d-a) z - b; discriminant tr^2 - 4 < 0 forces c != 0
    const double t = m.trace();
    const double disc = 4.0 - t * t;  // > 0
    FixedPoint z;
    z.re = (m.a - m.d) / (2.0 * m.c);
    z.im = std::sqrt(disc) / (2.0 * std::fabs(m.c));
    return z;
}

Mat2 conjugator(const Mat2& m) {
    const FixedPoint z = mobius_fixed_point(m);
    const double s = 1.0 / std::sqrt(z.im);
    return {s, -s * z.re, 0.0, s * z.im};
}

double hs_norm_sq(const Mat2& m) {
    return m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
}

double commutator_norm(const Mat2& x, const Mat2& y) {
    const Mat2 xy = mul(x, y);
    const Mat2 yx = mul(y, x);
    return frobenius_norm({xy.a - yx.a, xy.b - yx.b, xy.c - yx.c, xy.d - yx.d});
}

}  // namespace gaplab
