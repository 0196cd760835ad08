// mat2.hpp - real 2x2 unimodular matrix arithmetic and trace classification
#pragma once

#include <stdexcept>
#include <string>

namespace gaplab {

// Typed failure carrying a short stable code ("NotElliptic", "LcmOverflow", ...).
// The CLI maps codes to exit statuses; tests match on code().
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

inline constexpr double tol_hyp = 1e-9;  // |tr|-2 dead zone around parabolic
inline constexpr double tol_det = 1e-9;  // unimodularity drift allowance

struct Mat2 {
    double a = 1.0, b = 0.0;  // [[a, b],
    double c = 0.0, d = 1.0;  //  [c, d]]

    static Mat2 identity() { return {}; }

    double trace() const { return a + d; }
    double det() const { return a * d - b * c; }
    // unimodular inverse; valid when det == 1
    Mat2 inverse() const { return {d, -b, -c, a}; }
};

Mat2 mul(const Mat2& lhs, const Mat2& rhs);
inline Mat2 operator*(const Mat2& lhs, const Mat2& rhs) { return mul(lhs, rhs); }

double frobenius_norm(const Mat2& m);
double max_abs_entry(const Mat2& m);

enum class TraceClass { Elliptic, Parabolic, Hyperbolic, PlusMinusIdentity };

const char* to_string(TraceClass t);

// |tr|<2-tol elliptic, |tr|>2+tol hyperbolic, else parabolic unless
// the matrix is +-I entrywise within tol.
TraceClass classify(const Mat2& m, double tol = tol_hyp);

// larger eigenvalue modulus: (|t|+sqrt(t^2-4))/2 when |t|>=2, else 1
double spectral_radius(const Mat2& m);

struct FixedPoint {
    double re = 0.0;
    double im = 0.0;  // > 0
};

// unique fixed point in the upper half plane of z -> (az+b)/(cz+d);
// defined for elliptic input only (throws Error("NotElliptic"))
FixedPoint mobius_fixed_point(const Mat2& m);

// M in SL(2,R) with M z+ = i, so M m M^{-1} is a rotation when m is elliptic.
// M = (im)^{-1/2} [[1, -re], [0, im]].
Mat2 conjugator(const Mat2& m);

double hs_norm_sq(const Mat2& m);  // sum of squared entries

double commutator_norm(const Mat2& x, const Mat2& y);

}  // namespace gaplab
