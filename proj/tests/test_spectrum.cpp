#include "gaplab/spectrum.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gaplab/transfer.hpp"

using namespace gaplab;

namespace {

Word random_word(std::mt19937_64& rng, long letters, double amp = 2.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    std::vector<double> flat;
    for (long i = 0; i < letters; ++i) flat.push_back(u(rng));
    return Word(1, std::move(flat));
}

}  // namespace

TEST_CASE("energy window normalization and measure") {
    EnergyWindow w({{1.0, 2.0}, {-1.0, 0.5}, {1.5, 3.0}});
    REQUIRE(w.parts().size() == 2);
    CHECK(w.parts()[0].lo == -1.0);
    CHECK(w.parts()[0].hi == 0.5);
    CHECK(w.parts()[1].lo == 1.0);
    CHECK(w.parts()[1].hi == 3.0);
    CHECK(w.measure() == doctest::Approx(3.5));
    CHECK(w.contains(0.0));
    CHECK(!w.contains(0.75));

    EnergyWindow cut = w.subtract_balls({0.0, 2.0}, 0.25);
    CHECK(cut.measure() == doctest::Approx(3.5 - 0.5 - 0.5));
    CHECK(!cut.contains(0.1));

    EnergyWindow isect = w.intersect(Interval{0.0, 1.2});
    CHECK(isect.measure() == doctest::Approx(0.5 + 0.2));
}

TEST_CASE("free word has the single band [-2,2]") {
    BandSet b = band_edges(Word(1, {0.0}), 1.0);
    REQUIRE(b.bands.size() == 1);
    CHECK(b.q == 1);
    CHECK(std::fabs(b.bands[0].lo - (-2.0)) < 1e-10);
    CHECK(std::fabs(b.bands[0].hi - 2.0) < 1e-10);
}

TEST_CASE("period-2 band edges against the quadratic formula") {
    // word (2,0): discriminant (E-2)E - 2, edges at D = +-2:
    // {1-sqrt5, 0} and {2, 1+sqrt5}
    BandSet b = band_edges(Word(1, {2.0, 0.0}), 1.0);
    REQUIRE(b.bands.size() == 2);
    const double s5 = std::sqrt(5.0);
    CHECK(b.bands[0].lo == doctest::Approx(1.0 - s5).epsilon(1e-10));
    CHECK(b.bands[0].hi == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(b.bands[1].lo == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(b.bands[1].hi == doctest::Approx(1.0 + s5).epsilon(1e-10));
}

TEST_CASE("bands are exactly where the discriminant is small") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 25; ++rep) {
        Word w = random_word(rng, 1 + rep % 6);
        const double lam = 0.5 + 0.1 * (rep % 5);
        BandSet b = band_edges(w, lam);
        REQUIRE(static_cast<long>(b.bands.size()) == w.site_count());
        for (std::size_t j = 0; j < b.bands.size(); ++j) {
            const Interval& band = b.bands[j];
            CHECK(std::fabs(discriminant(w, band.midpoint(), lam)) <= 2.0 + 1e-9);
            CHECK(std::fabs(std::fabs(discriminant(w, band.lo, lam)) - 2.0) < 1e-6);
            CHECK(std::fabs(std::fabs(discriminant(w, band.hi, lam)) - 2.0) < 1e-6);
            if (j + 1 < b.bands.size() && b.bands[j + 1].lo > band.hi + 1e-9) {
                double gap_mid = 0.5 * (band.hi + b.bands[j + 1].lo);
                CHECK(std::fabs(discriminant(w, gap_mid, lam)) > 2.0);
            }
        }
    }
}

TEST_CASE("in_spectrum and lyapunov agree about the resolvent set") {
    Word w(1, {1.0, -0.5, 0.2});
    BandSet b = band_edges(w, 1.0);
    for (const auto& band : b.bands) {
        CHECK(in_spectrum(w, band.midpoint(), 1.0));
        CHECK(lyapunov(w, band.midpoint(), 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    }
    double outside = b.bands.back().hi + 0.5;
    CHECK(!in_spectrum(w, outside, 1.0));
    CHECK(lyapunov(w, outside, 1.0) > 0.0);
}

TEST_CASE("free-line lyapunov exponent is arccosh(|E|/2) off the spectrum") {
    Word w(1, {0.0});
    for (double E : {2.5, 3.0, 4.0, -2.7}) {
        CHECK(lyapunov(w, E, 1.0) ==
              doctest::Approx(std::acosh(std::fabs(E) / 2.0)).epsilon(1e-10));
    }
}

TEST_CASE("ids hits 1/2 at the free band center and steps by 1/q per band") {
    Word w(1, {0.0});
    CHECK(ids(w, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ids(w, -3.0, 1.0) == doctest::Approx(0.0));
    CHECK(ids(w, 3.0, 1.0) == doctest::Approx(1.0));

    std::mt19937_64 rng(52);
    for (int rep = 0; rep < 15; ++rep) {
        Word x = random_word(rng, 2 + rep % 5);
        const long q = x.site_count();
        BandSet b = band_edges(x, 1.0);
        double below = b.bands.front().lo - 1.0;
        CHECK(ids(x, below, 1.0) == doctest::Approx(0.0));
        for (std::size_t j = 0; j < b.bands.size(); ++j) {
            double above = j + 1 < b.bands.size()
                               ? 0.5 * (b.bands[j].hi + b.bands[j + 1].lo)
                               : b.bands[j].hi + 1.0;
            CHECK(ids(x, above, 1.0) ==
                  doctest::Approx(static_cast<double>(j + 1) / q).epsilon(1e-9));
        }
    }
}

TEST_CASE("ids is monotone across a band") {
    Word x(1, {1.0, -0.3});
    BandSet b = band_edges(x, 1.0);
    for (const auto& band : b.bands) {
        double prev = ids(x, band.lo - 1e-9, 1.0);
        for (int i = 1; i <= 20; ++i) {
            double E = band.lo + band.length() * i / 21.0;
            double cur = ids(x, E, 1.0);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("ids derivative via conjugators matches finite differences") {
    CHECK(ids_derivative_conjugacy(Word(1, {0.0}), 0.0, 1.0) ==
          doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-10));

    std::mt19937_64 rng(53);
    int checked = 0;
    while (checked < 40) {
        Word x = random_word(rng, 2 + checked % 4, 1.5);
        BandSet b = band_edges(x, 1.0);
        for (const auto& band : b.bands) {
            const double E = band.lo + 0.37 * band.length();
            if (std::fabs(discriminant(x, E, 1.0)) > 1.8) continue;
            const double h = std::max(band.length() * 1e-5, 1e-9);
            const double fd = (ids(x, E + h, 1.0) - ids(x, E - h, 1.0)) / (2.0 * h);
            const double got = ids_derivative_conjugacy(x, E, 1.0);
            CHECK(got == doctest::Approx(fd).epsilon(1e-3));
            ++checked;
        }
    }
}

TEST_CASE("ids derivative rejects gap energies") {
    Word x(1, {2.0, 0.0});
    CHECK_THROWS_AS(ids_derivative_conjugacy(x, 1.0, 1.0), Error);  // gap (0, 2)
    try {
        ids_derivative_conjugacy(x, 1.0, 1.0);
    } catch (const Error& e) {
        CHECK(e.code() == "NotInteriorOfBand");
    }
}

TEST_CASE("measure in window clips bands correctly") {
    BandSet b;
    b.q = 2;
    b.bands = {{-1.0, 0.0}, {1.0, 3.0}};
    CHECK(measure_in_window(b, EnergyWindow::single(-2.0, 4.0)) == doctest::Approx(3.0));
    CHECK(measure_in_window(b, EnergyWindow::single(-0.5, 2.0)) == doctest::Approx(1.5));
    CHECK(measure_in_window(b, EnergyWindow::single(0.25, 0.75)) == doctest::Approx(0.0));
}

TEST_CASE("strong coupling makes thin bands whose widths follow 4/|D'|") {
    // period 8, alternating 30,0: band widths far below the eigensolver noise
    std::vector<double> v;
    for (int i = 0; i < 4; ++i) {
        v.push_back(30.0);
        v.push_back(0.0);
    }
    Word w(1, std::move(v));
    BandSet b = band_edges(w, 1.0);
    REQUIRE(b.bands.size() == 8);
    for (const auto& band : b.bands) {
        CHECK(band.length() >= 0.0);
        if (band.length() > 0.0 && band.length() < 1e-9) {
            ScaledValue d = discriminant_derivative(w.aggregate(), band.midpoint(), 1.0);
            const double want = 4.0 / std::exp(d.log_abs());
            CHECK(band.length() == doctest::Approx(want).epsilon(1e-2));
        }
    }
    CHECK(b.total_measure() < 1.0);
}
