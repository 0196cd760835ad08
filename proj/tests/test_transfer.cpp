#include "gaplab/transfer.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

using namespace gaplab;

namespace {

Word random_word(std::mt19937_64& rng, long letters, double amp = 2.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    std::vector<double> flat;
    for (long i = 0; i < letters; ++i) flat.push_back(u(rng));
    return Word(1, std::move(flat));
}

// reference product without any renormalization tricks
Mat2 brute_product(std::span<const double> v, double E, double lambda) {
    Mat2 p = Mat2::identity();
    for (double x : v) p = transfer_single(lambda * x, E) * p;
    return p;
}

}  // namespace

TEST_CASE("one-step matrix layout") {
    Mat2 t = transfer_single(0.25, 1.5);
    CHECK(t.a == 1.25);
    CHECK(t.b == -1.0);
    CHECK(t.c == 1.0);
    CHECK(t.d == 0.0);
    CHECK(t.det() == doctest::Approx(1.0));
}

TEST_CASE("word product is the ordered product, rightmost factor first") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        Word w = random_word(rng, 1 + rep % 7);
        double E = 0.3 * rep - 5.0;
        Mat2 got = transfer_word(w, E, 0.7);
        Mat2 want = brute_product(w.aggregate(), E, 0.7);
        CHECK(got.a == doctest::Approx(want.a).epsilon(1e-12));
        CHECK(got.b == doctest::Approx(want.b).epsilon(1e-12));
        CHECK(got.c == doctest::Approx(want.c).epsilon(1e-12));
        CHECK(got.d == doctest::Approx(want.d).epsilon(1e-12));
    }
}

TEST_CASE("concatenation reverses the factors") {
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 50; ++rep) {
        Word x = random_word(rng, 2 + rep % 4);
        Word y = random_word(rng, 1 + rep % 5);
        double E = -2.0 + 0.08 * rep;
        Mat2 lhs = transfer_word(concat(x, y), E);
        Mat2 rhs = transfer_word(y, E) * transfer_word(x, E);
        CHECK(lhs.a == doctest::Approx(rhs.a).epsilon(1e-11));
        CHECK(lhs.b == doctest::Approx(rhs.b).epsilon(1e-11));
        CHECK(lhs.c == doctest::Approx(rhs.c).epsilon(1e-11));
        CHECK(lhs.d == doctest::Approx(rhs.d).epsilon(1e-11));
    }
}

TEST_CASE("sharp powers map to matrix powers") {
    std::mt19937_64 rng(33);
    Word x = random_word(rng, 4, 1.5);
    const double E = 0.4;
    Mat2 t = transfer_word(x, E);
    Mat2 acc = Mat2::identity();
    for (int m = 1; m <= 6; ++m) {
        acc = t * acc;
        Mat2 got = transfer_word(sharp_power(x, m), E);
        CHECK(got.a == doctest::Approx(acc.a).epsilon(1e-9));
        CHECK(got.d == doctest::Approx(acc.d).epsilon(1e-9));
    }
}

TEST_CASE("determinant stays pinned over long products") {
    std::mt19937_64 rng(34);
    // weak disorder keeps entries O(1) for 10000 sites, so det is readable
    // directly and any roundoff drift the periodic renorm misses would show
    Word w = random_word(rng, 10000, 0.02);
    Mat2 t = transfer_word(w, 0.1);
    CHECK(std::fabs(t.det() - 1.0) < 1e-9);
}

TEST_CASE("scaled product matches the direct one while it fits in doubles") {
    std::mt19937_64 rng(35);
    for (int rep = 0; rep < 20; ++rep) {
        Word w = random_word(rng, 60);
        double E = 4.0;  // uniformly hyperbolic, entries grow but stay finite
        Mat2 direct = brute_product(w.aggregate(), E, 1.0);
        ScaledMat2 scaled = transfer_word_scaled(w.aggregate(), E, 1.0);
        double f = std::exp2(scaled.log2_scale);
        CHECK(scaled.m.a * f == doctest::Approx(direct.a).epsilon(1e-9));
        CHECK(scaled.m.b * f == doctest::Approx(direct.b).epsilon(1e-9));
        CHECK(scaled.m.c * f == doctest::Approx(direct.c).epsilon(1e-9));
        CHECK(scaled.m.d * f == doctest::Approx(direct.d).epsilon(1e-9));
    }
}

TEST_CASE("scaled product survives far beyond double range") {
    // constant letter v=10 at E=0: T is hyperbolic with eigenvalue
    // (10+sqrt(96))/2, so log spr of T^n grows linearly in n
    std::vector<double> v(20000, 10.0);
    ScaledMat2 t = transfer_word_scaled(v, 0.0, 1.0);
    const double per_step = std::log(0.5 * (10.0 + std::sqrt(96.0)));
    CHECK(t.log_spectral_radius() ==
          doctest::Approx(20000.0 * per_step).epsilon(1e-10));
    CHECK(std::isfinite(t.m.a));
}

TEST_CASE("discriminant derivative agrees with central differences") {
    std::mt19937_64 rng(36);
    for (int rep = 0; rep < 30; ++rep) {
        Word w = random_word(rng, 6 + rep % 5);
        double E = -3.0 + 0.2 * rep;
        const double h = 1e-6;
        double fd = (discriminant(w, E + h) - discriminant(w, E - h)) / (2.0 * h);
        ScaledValue d = discriminant_derivative(w.aggregate(), E);
        if (std::fabs(fd) > 1e-4)
            CHECK(d.value() == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("energy grid validation") {
    EnergyGrid g = EnergyGrid::uniform(-2.0, 2.0, 5);
    CHECK(g.points.size() == 5);
    CHECK(g.points.front() == -2.0);
    CHECK(g.points.back() == 2.0);
    g.validate();
    EnergyGrid bad;
    bad.points = {0.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), Error);
}
