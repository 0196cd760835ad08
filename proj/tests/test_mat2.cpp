#include "gaplab/mat2.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

using namespace gaplab;

namespace {

Mat2 rotation(double theta) {
    return {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
}

// Mobius action of an SL(2,R) matrix on the upper half plane
std::complex<double> mobius(const Mat2& m, std::complex<double> z) {
    return (m.a * z + m.b) / (m.c * z + m.d);
}

}  // namespace

TEST_CASE("multiplication against direct expansion") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        Mat2 x{u(rng), u(rng), u(rng), u(rng)};
        Mat2 y{u(rng), u(rng), u(rng), u(rng)};
        Mat2 p = x * y;
        CHECK(p.a == doctest::Approx(x.a * y.a + x.b * y.c).epsilon(1e-14));
        CHECK(p.b == doctest::Approx(x.a * y.b + x.b * y.d).epsilon(1e-14));
        CHECK(p.c == doctest::Approx(x.c * y.a + x.d * y.c).epsilon(1e-14));
        CHECK(p.d == doctest::Approx(x.c * y.b + x.d * y.d).epsilon(1e-14));
    }
}

TEST_CASE("inverse of a unimodular matrix") {
    Mat2 m{2.0, 1.0, 3.0, 2.0};  // det 1
    Mat2 p = m * m.inverse();
    CHECK(p.a == doctest::Approx(1.0));
    CHECK(p.b == doctest::Approx(0.0));
    CHECK(p.c == doctest::Approx(0.0));
    CHECK(p.d == doctest::Approx(1.0));
}

TEST_CASE("trace classification") {
    CHECK(classify(rotation(0.7)) == TraceClass::Elliptic);
    CHECK(classify(Mat2{3.0, 0.0, 0.0, 1.0 / 3.0}) == TraceClass::Hyperbolic);
    CHECK(classify(Mat2{1.0, 1.0, 0.0, 1.0}) == TraceClass::Parabolic);
    CHECK(classify(Mat2{1.0, 0.0, 0.0, 1.0}) == TraceClass::PlusMinusIdentity);
    CHECK(classify(Mat2{-1.0, 0.0, 0.0, -1.0}) == TraceClass::PlusMinusIdentity);
    // inside the tolerance band around |tr| = 2 everything is parabolic
    CHECK(classify(Mat2{1.0 + 1e-12, 1.0, 0.0, 1.0}) == TraceClass::Parabolic);
}

TEST_CASE("spectral radius equals the explicit eigenvalue") {
    // diag(l, 1/l) has spectral radius l
    for (double l : {1.5, 2.0, 10.0, 123.0}) {
        Mat2 m{l, 0.0, 0.0, 1.0 / l};
        CHECK(spectral_radius(m) == doctest::Approx(l).epsilon(1e-14));
    }
    // elliptic and parabolic matrices sit on the unit circle
    CHECK(spectral_radius(rotation(1.0)) == doctest::Approx(1.0));
    CHECK(spectral_radius(Mat2{1.0, 5.0, 0.0, 1.0}) == doctest::Approx(1.0));
    // quadratic-formula oracle on random hyperbolic conjugates
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        double l = 1.1 + std::fabs(u(rng)) * 4.0;
        Mat2 g{1.0, u(rng), u(rng), 0.0};
        g.d = (1.0 + g.b * g.c) / g.a;  // det 1
        Mat2 m = g * Mat2{l, 0.0, 0.0, 1.0 / l} * g.inverse();
        double t = std::fabs(m.trace());
        double oracle = 0.5 * (t + std::sqrt(t * t - 4.0));
        CHECK(spectral_radius(m) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(spectral_radius(m) == doctest::Approx(l).epsilon(1e-9));
    }
}

TEST_CASE("Mobius fixed point lies in the upper half plane and is fixed") {
    CHECK(mobius_fixed_point(rotation(0.9)).re == doctest::Approx(0.0));
    CHECK(mobius_fixed_point(rotation(0.9)).im == doctest::Approx(1.0));

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int found = 0;
    while (found < 50) {
        Mat2 m{u(rng), u(rng), u(rng), 0.0};
        if (std::fabs(m.a) < 0.1) continue;
        m.d = (1.0 + m.b * m.c) / m.a;
        if (classify(m) != TraceClass::Elliptic || std::fabs(m.c) < 1e-6) continue;
        FixedPoint z = mobius_fixed_point(m);
        CHECK(z.im > 0.0);
        std::complex<double> zc{z.re, z.im};
        std::complex<double> img = mobius(m, zc);
        CHECK(std::abs(img - zc) < 1e-9);
        ++found;
    }
}

TEST_CASE("mobius_fixed_point rejects non-elliptic input") {
    CHECK_THROWS_WITH_AS(mobius_fixed_point(Mat2{3.0, 0.0, 0.0, 1.0 / 3.0}),
                         doctest::Contains("elliptic"), Error);
    try {
        mobius_fixed_point(Mat2{3.0, 0.0, 0.0, 1.0 / 3.0});
    } catch (const Error& e) {
        CHECK(e.code() == "NotElliptic");
    }
}

TEST_CASE("conjugator rotates an elliptic matrix into SO(2)") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int found = 0;
    while (found < 50) {
        Mat2 m{u(rng), u(rng), u(rng), 0.0};
        if (std::fabs(m.a) < 0.1) continue;
        m.d = (1.0 + m.b * m.c) / m.a;
        if (classify(m) != TraceClass::Elliptic || std::fabs(m.c) < 1e-6) continue;

        Mat2 M = conjugator(m);
        CHECK(M.det() == doctest::Approx(1.0).epsilon(1e-10));
        FixedPoint z = mobius_fixed_point(m);
        std::complex<double> img = mobius(M, {z.re, z.im});
        CHECK(std::abs(img - std::complex<double>{0.0, 1.0}) < 1e-9);

        Mat2 r = M * m * M.inverse();
        // rotation: r^T r = I and the trace is preserved
        CHECK(r.a * r.a + r.c * r.c == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.a * r.b + r.c * r.d == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(r.trace() == doctest::Approx(m.trace()).epsilon(1e-9));
        ++found;
    }
}

TEST_CASE("conjugator norm of the free transfer matrix") {
    // ||M(T(0,E))||_HS^2 = 4/sqrt(4-E^2); this closed form anchors the
    // density-of-states derivative
    for (double E : {0.0, 0.5, -1.2, 1.9, -1.99}) {
        Mat2 t{E, -1.0, 1.0, 0.0};
        CHECK(hs_norm_sq(conjugator(t)) ==
              doctest::Approx(4.0 / std::sqrt(4.0 - E * E)).epsilon(1e-10));
    }
}

TEST_CASE("commutator norm vanishes exactly for commuting pairs") {
    Mat2 d1{2.0, 0.0, 0.0, 0.5};
    Mat2 d2{3.0, 0.0, 0.0, 1.0 / 3.0};
    CHECK(commutator_norm(d1, d2) == doctest::Approx(0.0));
    CHECK(commutator_norm(rotation(0.3), rotation(1.1)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(commutator_norm(d1, rotation(0.5)) > 0.1);
}
